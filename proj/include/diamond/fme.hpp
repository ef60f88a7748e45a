#pragma once

// Exact Fourier-Motzkin elimination over rational linear systems.

#include <algorithm>
#include <cstddef>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "diamond/errors.hpp"
#include "diamond/lp.hpp"

namespace diamond {

enum class Relation { Le, Ge, Eq };

struct LinearRow {
  std::vector<Rational> coeffs;  // one per symbol
  Relation rel = Relation::Le;
  Rational rhs;
};

struct LinearInequalitySystem {
  std::vector<std::string> symbols;
  std::vector<LinearRow> rows;

  std::size_t index_of(const std::string& s) const {
    auto it = std::find(symbols.begin(), symbols.end(), s);
    if (it == symbols.end()) throw DomainError("unknown symbol '" + s + "'");
    return static_cast<std::size_t>(it - symbols.begin());
  }
};

struct EliminationReport {
  std::vector<std::string> eliminated;
  LinearInequalitySystem result;
  std::size_t dropped_redundant = 0;
  std::size_t peak_rows = 0;
};

struct EliminateOptions {
  bool lp_redundancy = false;
  std::size_t row_guard = 100000;
};

namespace detail {

inline bool is_zero(const std::vector<Rational>& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& r) { return r == 0; });
}

/// Leading nonzero coefficient, or zero for an all-zero row.
inline Rational leading(const std::vector<Rational>& v) {
  for (const auto& c : v)
    if (c != 0) return c;
  return 0;
}

inline LinearRow as_le(LinearRow r) {
  if (r.rel == Relation::Ge) {
    for (auto& c : r.coeffs) c = -c;
    r.rhs = -r.rhs;
    r.rel = Relation::Le;
  }
  return r;
}

inline LinearRow scaled(LinearRow r) {
  r = as_le(std::move(r));
  Rational lead = leading(r.coeffs);
  if (lead == 0) return r;
  if (r.rel == Relation::Le && lead < 0) lead = -lead;
  for (auto& c : r.coeffs) c /= lead;
  r.rhs /= lead;
  return r;
}

inline bool row_less(const LinearRow& a, const LinearRow& b) {
  if (a.rel != b.rel) return static_cast<int>(a.rel) < static_cast<int>(b.rel);
  // Descending coefficients put rows with positive leading terms first.
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    if (a.coeffs[i] != b.coeffs[i]) return a.coeffs[i] > b.coeffs[i];
  return a.rhs < b.rhs;
}

inline bool same_lhs(const LinearRow& a, const LinearRow& b) { return a.rel == b.rel && a.coeffs == b.coeffs; }

}  // namespace detail

/// Rewrites >= rows as <=, scales each row so its leading coefficient has magnitude 1
/// (equalities: exactly +1), drops trivially true rows, keeps only the tightest row per
/// left-hand side and sorts. Idempotent.
inline LinearInequalitySystem normalize(const LinearInequalitySystem& sys) {
  LinearInequalitySystem out{sys.symbols, {}};
  for (const auto& r : sys.rows) {
    auto s = detail::scaled(r);
    if (detail::is_zero(s.coeffs)) {
      const bool holds = s.rel == Relation::Eq ? s.rhs == 0 : s.rhs >= 0;
      if (holds) continue;
    }
    out.rows.push_back(std::move(s));
  }
  std::sort(out.rows.begin(), out.rows.end(), detail::row_less);
  std::vector<LinearRow> kept;
  for (auto& r : out.rows) {
    if (!kept.empty() && detail::same_lhs(kept.back(), r)) {
      // Sorted by rhs ascending, so the first <= row is the tightest; equal equalities collapse.
      if (r.rel == Relation::Le || kept.back().rhs == r.rhs) continue;
    }
    kept.push_back(std::move(r));
  }
  out.rows = std::move(kept);
  return out;
}

namespace detail {

struct TrackedRow {
  LinearRow row;            // always Relation::Le
  std::set<std::size_t> history;  // source inequality indices (Chernikov test)
};

inline std::vector<LeRow> to_le_rows(const std::vector<TrackedRow>& rows) {
  std::vector<LeRow> out;
  for (const auto& r : rows) out.push_back({r.row.coeffs, r.row.rhs});
  return out;
}

/// Keeps the tightest row per normalized left-hand side; returns the number removed.
inline std::size_t dedupe(std::vector<TrackedRow>& rows) {
  for (auto& r : rows) {
    Rational lead = leading(r.row.coeffs);
    if (lead < 0) lead = -lead;
    if (lead != 0) {
      for (auto& c : r.row.coeffs) c /= lead;
      r.row.rhs /= lead;
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TrackedRow& a, const TrackedRow& b) {
    if (a.row.coeffs != b.row.coeffs) return row_less(a.row, b.row);
    if (a.row.rhs != b.row.rhs) return a.row.rhs < b.row.rhs;
    return a.history.size() < b.history.size();
  });
  std::vector<TrackedRow> kept;
  std::size_t dropped = 0;
  for (auto& r : rows) {
    if (is_zero(r.row.coeffs) && r.row.rhs >= 0) {
      ++dropped;
      continue;
    }
    if (!kept.empty() && kept.back().row.coeffs == r.row.coeffs) {
      ++dropped;
      continue;
    }
    kept.push_back(std::move(r));
  }
  rows = std::move(kept);
  return dropped;
}

/// Removes rows implied by the others, scanning in order; exact.
inline std::size_t lp_prune(std::vector<TrackedRow>& rows, std::size_t nvars) {
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < rows.size();) {
    std::vector<TrackedRow> others;
    for (std::size_t j = 0; j < rows.size(); ++j)
      if (j != i) others.push_back(rows[j]);
    if (implies(to_le_rows(others), {rows[i].row.coeffs, rows[i].row.rhs}, nvars)) {
      rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(i));
      ++dropped;
    } else {
      ++i;
    }
  }
  return dropped;
}

}  // namespace detail

/// Projects the system onto the non-victim symbols. Equalities containing a victim are used
/// for substitution; the remaining victims are eliminated by pairing opposite-sign rows.
inline EliminationReport eliminate(const LinearInequalitySystem& sys, const std::vector<std::string>& victims,
                                   const EliminateOptions& opt = {}) {
  if (sys.rows.empty()) throw DomainError("cannot eliminate from an empty system");
  const std::size_t nv = sys.symbols.size();
  std::vector<std::size_t> victim_idx;
  for (const auto& v : victims) {
    const auto idx = sys.index_of(v);
    if (std::find(victim_idx.begin(), victim_idx.end(), idx) != victim_idx.end())
      throw DomainError("symbol '" + v + "' listed twice for elimination");
    victim_idx.push_back(idx);
  }

  std::vector<LinearRow> eqs;
  std::vector<detail::TrackedRow> ineqs;
  for (const auto& r : sys.rows) {
    if (r.coeffs.size() != nv) throw DomainError("row width does not match the symbol list");
    if (r.rel == Relation::Eq) {
      eqs.push_back(r);
    } else {
      detail::TrackedRow t{detail::as_le(r), {ineqs.size()}};
      ineqs.push_back(std::move(t));
    }
  }

  EliminationReport rep;
  rep.eliminated = victims;
  rep.dropped_redundant += detail::dedupe(ineqs);
  rep.peak_rows = ineqs.size();
  std::size_t fm_steps = 0;

  for (auto v : victim_idx) {
    // Substitution through an equality, preferring a unit coefficient.
    std::optional<std::size_t> pick;
    for (std::size_t e = 0; e < eqs.size(); ++e) {
      const auto& c = eqs[e].coeffs[v];
      if (c == 0) continue;
      if (!pick || ((c == 1 || c == -1) && !(eqs[*pick].coeffs[v] == 1 || eqs[*pick].coeffs[v] == -1))) pick = e;
    }
    if (pick) {
      LinearRow eq = eqs[*pick];
      eqs.erase(eqs.begin() + static_cast<std::ptrdiff_t>(*pick));
      const Rational cv = eq.coeffs[v];
      auto substitute = [&](LinearRow& r) {
        const Rational f = r.coeffs[v] / cv;
        if (f == 0) return;
        for (std::size_t j = 0; j < nv; ++j) r.coeffs[j] -= f * eq.coeffs[j];
        r.rhs -= f * eq.rhs;
        r.coeffs[v] = 0;
      };
      for (auto& e : eqs) substitute(e);
      for (auto& t : ineqs) substitute(t.row);
      rep.dropped_redundant += detail::dedupe(ineqs);
      continue;
    }

    ++fm_steps;
    std::vector<detail::TrackedRow> pos, neg, next;
    for (auto& t : ineqs) {
      if (t.row.coeffs[v] > 0)
        pos.push_back(std::move(t));
      else if (t.row.coeffs[v] < 0)
        neg.push_back(std::move(t));
      else
        next.push_back(std::move(t));
    }
    for (const auto& p : pos)
      for (const auto& q : neg) {
        std::set<std::size_t> hist = p.history;
        hist.insert(q.history.begin(), q.history.end());
        // Chernikov: after k eliminations a row built from more than k+1 sources is redundant.
        if (hist.size() > fm_steps + 1) {
          ++rep.dropped_redundant;
          continue;
        }
        const Rational fp = -q.row.coeffs[v];
        const Rational fq = p.row.coeffs[v];
        detail::TrackedRow t;
        t.row.rel = Relation::Le;
        t.row.coeffs.resize(nv);
        for (std::size_t j = 0; j < nv; ++j) t.row.coeffs[j] = fp * p.row.coeffs[j] + fq * q.row.coeffs[j];
        t.row.coeffs[v] = 0;
        t.row.rhs = fp * p.row.rhs + fq * q.row.rhs;
        t.history = std::move(hist);
        next.push_back(std::move(t));
        if (next.size() > opt.row_guard) {
          std::ostringstream os;
          os << "Fourier-Motzkin row count exceeded " << opt.row_guard << " while eliminating '"
             << sys.symbols[v] << "'";
          throw GuardError(os.str());
        }
      }
    ineqs = std::move(next);
    rep.dropped_redundant += detail::dedupe(ineqs);
    rep.peak_rows = std::max(rep.peak_rows, ineqs.size());
  }

  if (opt.lp_redundancy) rep.dropped_redundant += detail::lp_prune(ineqs, nv);

  // Drop eliminated columns.
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < nv; ++j)
    if (std::find(victim_idx.begin(), victim_idx.end(), j) == victim_idx.end()) keep.push_back(j);
  LinearInequalitySystem out;
  for (auto j : keep) out.symbols.push_back(sys.symbols[j]);
  auto project = [&](const LinearRow& r) {
    LinearRow o;
    o.rel = r.rel;
    o.rhs = r.rhs;
    for (auto j : keep) o.coeffs.push_back(r.coeffs[j]);
    return o;
  };
  for (const auto& e : eqs) out.rows.push_back(project(e));
  for (const auto& t : ineqs) out.rows.push_back(project(t.row));
  rep.result = normalize(out);
  return rep;
}

/// Reorders the columns of sys to follow `order` (same symbol set).
inline LinearInequalitySystem reorder_symbols(const LinearInequalitySystem& sys,
                                              const std::vector<std::string>& order) {
  if (order.size() != sys.symbols.size()) throw DomainError("systems have different symbol sets");
  LinearInequalitySystem out{order, {}};
  std::vector<std::size_t> map;
  for (const auto& s : order) {
    auto it = std::find(sys.symbols.begin(), sys.symbols.end(), s);
    if (it == sys.symbols.end()) throw DomainError("systems have different symbol sets ('" + s + "')");
    map.push_back(static_cast<std::size_t>(it - sys.symbols.begin()));
  }
  for (const auto& r : sys.rows) {
    LinearRow o{{}, r.rel, r.rhs};
    for (auto j : map) o.coeffs.push_back(r.coeffs[j]);
    out.rows.push_back(std::move(o));
  }
  return out;
}

struct RowDifference {
  std::vector<LinearRow> only_in_a;
  std::vector<LinearRow> only_in_b;
};

inline RowDifference row_difference(const LinearInequalitySystem& a, const LinearInequalitySystem& b) {
  const auto na = normalize(a);
  const auto nb = normalize(reorder_symbols(b, a.symbols));
  RowDifference d;
  auto contains = [](const std::vector<LinearRow>& rows, const LinearRow& r) {
    return std::any_of(rows.begin(), rows.end(), [&](const LinearRow& x) {
      return x.rel == r.rel && x.coeffs == r.coeffs && x.rhs == r.rhs;
    });
  };
  for (const auto& r : na.rows)
    if (!contains(nb.rows, r)) d.only_in_a.push_back(r);
  for (const auto& r : nb.rows)
    if (!contains(na.rows, r)) d.only_in_b.push_back(r);
  return d;
}

/// True iff the normalized row sets coincide.
inline bool check_equivalence(const LinearInequalitySystem& a, const LinearInequalitySystem& b) {
  const auto d = row_difference(a, b);
  return d.only_in_a.empty() && d.only_in_b.empty();
}

/// Rows of sys as a^T x <= b (equalities contribute both directions).
inline std::vector<LeRow> le_rows(const LinearInequalitySystem& sys) {
  std::vector<LeRow> out;
  for (const auto& r : sys.rows) {
    const auto le = detail::as_le(r);
    out.push_back({le.coeffs, le.rhs});
    if (r.rel == Relation::Eq) {
      LeRow neg{le.coeffs, -le.rhs};
      for (auto& c : neg.a) c = -c;
      out.push_back(std::move(neg));
    }
  }
  return out;
}

/// Whether every row of `rows_of` is implied by `sys` (same symbols, exact LP).
inline std::vector<bool> rows_implied(const LinearInequalitySystem& sys, const LinearInequalitySystem& rows_of) {
  const auto base = le_rows(sys);
  const auto ordered = reorder_symbols(rows_of, sys.symbols);
  std::vector<bool> out;
  for (const auto& r : le_rows(ordered)) out.push_back(implies(base, r, sys.symbols.size()));
  return out;
}

// ---------------------------------------------------------------------------------------------
// Text and JSON forms

inline std::string rational_to_string(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << "/" << denominator(r);
  return os.str();
}

inline Rational parse_rational(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw ParseError("empty rational literal");
  try {
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      const Rational num{boost::multiprecision::cpp_int(s.substr(0, slash))};
      const Rational den{boost::multiprecision::cpp_int(s.substr(slash + 1))};
      if (den == 0) throw ParseError("zero denominator in '" + text + "'");
      return num / den;
    }
    std::string mant = s;
    long exp10 = 0;
    const auto e = mant.find_first_of("eE");
    if (e != std::string::npos) {
      exp10 = std::stol(mant.substr(e + 1));
      mant = mant.substr(0, e);
    }
    const auto dot = mant.find('.');
    if (dot != std::string::npos) {
      exp10 -= static_cast<long>(mant.size() - dot - 1);
      mant.erase(dot, 1);
    }
    if (mant.empty() || mant == "-" || mant == "+") throw ParseError("bad rational literal '" + text + "'");
    if (mant[0] == '+') mant.erase(0, 1);
    // cpp_int reads a leading 0 as octal.
    const std::size_t sign = mant[0] == '-' ? 1 : 0;
    const auto nz = mant.find_first_not_of('0', sign);
    mant.erase(sign, (nz == std::string::npos ? mant.size() - 1 : nz) - sign);
    if (mant.size() == sign) mant += '0';
    const Rational v{boost::multiprecision::cpp_int(mant)};
    boost::multiprecision::cpp_int p10 = 1;
    for (long i = 0; i < (exp10 < 0 ? -exp10 : exp10); ++i) p10 *= 10;
    return exp10 < 0 ? Rational(v / Rational(p10)) : Rational(v * Rational(p10));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("bad rational literal '" + text + "'");
  }
}

inline Rational rational_from_json(const nlohmann::json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return parse_rational(v.dump());
  if (v.is_number_float()) return parse_rational(v.dump());
  if (v.is_string()) return parse_rational(v.get<std::string>());
  throw ParseError("coefficient must be a number or a rational string");
}

inline nlohmann::json rational_to_json(const Rational& r) {
  if (denominator(r) == 1 && abs(numerator(r)) < boost::multiprecision::cpp_int(1) << 53)
    return static_cast<long long>(numerator(r));
  return rational_to_string(r);
}

/// Human-readable row with positive terms on the left: "R0 + logD1 <= C11 + C12".
inline std::string format_row(const std::vector<std::string>& symbols, const LinearRow& row) {
  std::ostringstream lhs, rhs;
  auto term = [&](std::ostringstream& os, const Rational& c, const std::string& name) {
    if (os.tellp() > 0) os << " + ";
    if (c != 1) os << rational_to_string(c) << "*";
    os << name;
  };
  for (std::size_t j = 0; j < symbols.size(); ++j) {
    if (row.coeffs[j] > 0) term(lhs, row.coeffs[j], symbols[j]);
    if (row.coeffs[j] < 0) term(rhs, -row.coeffs[j], symbols[j]);
  }
  if (row.rhs != 0) {
    if (rhs.tellp() > 0) rhs << " + ";
    rhs << rational_to_string(row.rhs);
  }
  std::string l = lhs.str(), r = rhs.str();
  if (l.empty()) l = "0";
  if (r.empty()) r = "0";
  const char* op = row.rel == Relation::Eq ? " = " : row.rel == Relation::Ge ? " >= " : " <= ";
  return l + op + r;
}

/// {"symbols":[...], "rows":[{"coeffs":{...},"rel":"<=","rhs":{"C11":1} or number}]}.
/// Symbolic right-hand terms are moved to the left with flipped sign; "const" inside rhs
/// (or a plain number) is the constant.
inline LinearInequalitySystem system_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("symbols") || !doc.contains("rows"))
    throw ParseError("system document needs 'symbols' and 'rows'");
  LinearInequalitySystem sys;
  try {
    sys.symbols = doc.at("symbols").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError("'symbols' must be a list of strings");
  }
  for (std::size_t i = 0; i < sys.symbols.size(); ++i)
    for (std::size_t j = i + 1; j < sys.symbols.size(); ++j)
      if (sys.symbols[i] == sys.symbols[j]) throw ParseError("duplicate symbol '" + sys.symbols[i] + "'");
  auto symbol = [&](const std::string& s) {
    auto it = std::find(sys.symbols.begin(), sys.symbols.end(), s);
    if (it == sys.symbols.end()) throw ParseError("row references undeclared symbol '" + s + "'");
    return static_cast<std::size_t>(it - sys.symbols.begin());
  };
  if (!doc.at("rows").is_array()) throw ParseError("'rows' must be a list");
  for (const auto& jr : doc.at("rows")) {
    LinearRow row;
    row.coeffs.assign(sys.symbols.size(), Rational(0));
    if (!jr.is_object() || !jr.contains("rel")) throw ParseError("each row needs 'rel'");
    const auto rel = jr.at("rel").get<std::string>();
    if (rel == "<=")
      row.rel = Relation::Le;
    else if (rel == ">=")
      row.rel = Relation::Ge;
    else if (rel == "=" || rel == "==")
      row.rel = Relation::Eq;
    else
      throw ParseError("unknown relation '" + rel + "'");
    if (jr.contains("coeffs")) {
      if (!jr.at("coeffs").is_object()) throw ParseError("'coeffs' must be an object");
      for (const auto& [k, v] : jr.at("coeffs").items()) row.coeffs[symbol(k)] += rational_from_json(v);
    }
    if (jr.contains("rhs")) {
      const auto& rhs = jr.at("rhs");
      if (rhs.is_object()) {
        for (const auto& [k, v] : rhs.items()) {
          if (k == "const")
            row.rhs += rational_from_json(v);
          else
            row.coeffs[symbol(k)] -= rational_from_json(v);
        }
      } else {
        row.rhs = rational_from_json(rhs);
      }
    }
    sys.rows.push_back(std::move(row));
  }
  return sys;
}

inline nlohmann::json system_to_json(const LinearInequalitySystem& sys) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : sys.rows) {
    nlohmann::json coeffs = nlohmann::json::object();
    for (std::size_t j = 0; j < sys.symbols.size(); ++j)
      if (r.coeffs[j] != 0) coeffs[sys.symbols[j]] = rational_to_json(r.coeffs[j]);
    rows.push_back({{"coeffs", coeffs},
                    {"rel", r.rel == Relation::Eq ? "=" : r.rel == Relation::Ge ? ">=" : "<="},
                    {"rhs", rational_to_json(r.rhs)},
                    {"text", format_row(sys.symbols, r)}});
  }
  return {{"symbols", sys.symbols}, {"rows", rows}};
}

}  // namespace diamond
