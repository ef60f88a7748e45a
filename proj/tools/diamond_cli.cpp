#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "diamond/diamond.hpp"

namespace {

using namespace diamond;

// Flag value problems map to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_doubles(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::vector<double> parse_exact(const std::string& flag, const std::string& text, std::size_t count) {
  auto v = parse_doubles(flag, text);
  if (v.size() != count)
    throw UsageError(flag + ": expected " + std::to_string(count) + " comma-separated values, got " +
                     std::to_string(v.size()));
  return v;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void require_nonnegative(const std::string& flag, const std::vector<double>& v) {
  for (double x : v)
    if (!(x >= 0.0) || !std::isfinite(x)) throw UsageError(flag + ": values must be finite and nonnegative");
}

void require_positive(const std::string& flag, const std::vector<double>& v) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) throw UsageError(flag + ": values must be finite and positive");
}

nlohmann::json read_json(const std::string& flag, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(flag + ": cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(flag + ": '" + path + "' is not valid JSON: " + e.what());
  }
}

// Writes to the file when a path is given, else to stdout.
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("--out: cannot write '" + path + "'");
  write(out);
}

std::string params_text(const BoundResult& r) {
  std::string s;
  for (std::size_t i = 0; i < r.param_names.size() && i < r.argmax_params.size(); ++i)
    s += (i ? " " : "") + r.param_names[i] + "=" + format_number(r.argmax_params[i]);
  if (!std::isnan(r.argmin_n)) s += " N=" + format_number(r.argmin_n);
  return s;
}

std::vector<double> linspace(double lo, double hi, long steps) {
  if (steps < 1) throw UsageError("--steps: must be at least 1");
  if (!(hi >= lo)) throw UsageError("--c-max: must not be below --c-min");
  std::vector<double> v;
  for (long i = 0; i < steps; ++i)
    v.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1));
  return v;
}

void write_sweep(std::ostream& os, const std::vector<SweepRow>& rows) {
  CsvWriter w(os, {"c0", "c", "lower", "upper", "cutset", "binding_lower", "binding_upper"});
  for (const auto& r : rows)
    w.row_strings({format_number(r.c0), format_number(r.c), format_number(r.lower), format_number(r.upper),
                   format_number(r.cutset), r.binding_lower, r.binding_upper});
}

void write_estimates(std::ostream& os, const std::vector<PhaseRow>& rows) {
  CsvWriter w(os, {"n", "mean", "half_width", "trials", "seed"});
  for (const auto& r : rows)
    w.row_strings({std::to_string(r.n), format_number(r.estimate.mean), format_number(r.estimate.half_width_95),
                   std::to_string(r.estimate.trials), std::to_string(r.seed)});
}

std::vector<std::size_t> parse_n_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_doubles("--n-list", text)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("--n-list: blocklengths must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounds, Fourier-Motzkin projection and typicality experiments for the diamond relay network"};
  app.require_subcommand(1);

  // bounds2
  auto* b2 = app.add_subcommand("bounds2", "Two-relay lower/upper/cut-set bounds at one capacity point");
  std::string caps_text, power_text = "1,1", phi_text = "sq", b2_out;
  std::size_t grid = 41;
  b2->add_option("--caps", caps_text, "c11,c22,c12,c21")->required();
  b2->add_option("--power", power_text, "p1,p2");
  b2->add_option("--grid", grid, "grid points per correlation axis");
  b2->add_option("--phi-variant", phi_text, "sq or linear");
  b2->add_option("--out", b2_out, "CSV output path (default stdout)");

  // sweeps
  std::string c0_text = "0,0.1,0.5", sw_out;
  double c_min = 0.0, c_max = 3.0, sw_power = 1.0;
  long steps = 13;
  auto add_sweep = [&](const std::string& name, const std::string& help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--c0", c0_text, "comma list of cross-link capacities");
    s->add_option("--c-min", c_min);
    s->add_option("--c-max", c_max);
    s->add_option("--steps", steps);
    s->add_option("--power", sw_power);
    s->add_option("--grid", grid, "grid points per correlation axis");
    s->add_option("--out", sw_out, "CSV output path (default stdout)");
    return s;
  };
  auto* s2 = add_sweep("sweep2", "Symmetric two-relay sweep over C for each C0");
  auto* s3 = add_sweep("sweep3", "Symmetric three-relay sweep over C for each C0");

  // fme
  auto* fm = app.add_subcommand("fme", "Fourier-Motzkin projection of a linear system");
  std::string system_path, eliminate_text, golden_path, fme_out;
  bool lp_prune = false;
  fm->add_option("--system", system_path, "system JSON")->required();
  fm->add_option("--eliminate", eliminate_text, "comma list of symbols to eliminate");
  fm->add_option("--golden", golden_path, "expected projected system JSON");
  fm->add_flag("--lp-prune", lp_prune, "drop rows implied by the others (exact LP)");
  fm->add_option("--out", fme_out, "result JSON path (default stdout)");

  // mc
  auto* mc = app.add_subcommand("mc", "Typicality lemma experiments");
  mc->require_subcommand(1);
  std::string spec_path, n_list = "32,64,128", mc_out;
  std::uint64_t seed = 7;
  std::size_t trials = 400;
  std::vector<CLI::App*> mc_subs;
  for (const char* name : {"cover", "pack", "dict"}) {
    auto* s = mc->add_subcommand(name);
    s->add_option("--spec", spec_path, "experiment JSON")->required();
    s->add_option("--seed", seed);
    s->add_option("--trials", trials);
    s->add_option("--n-list", n_list, "comma list of blocklengths");
    s->add_option("--out", mc_out, "CSV output path (default stdout)");
    mc_subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (b2->parsed()) {
      auto caps = parse_exact("--caps", caps_text, 4);
      require_nonnegative("--caps", caps);
      auto power = parse_exact("--power", power_text, 2);
      require_positive("--power", power);
      if (grid < 2) throw UsageError("--grid: must be at least 2");
      GridSpec search;
      search.points_per_axis = grid;
      if (phi_text == "sq") search.phi = PhiVariant::Squared;
      else if (phi_text == "linear") search.phi = PhiVariant::Linear;
      else throw UsageError("--phi-variant: expected sq or linear, got '" + phi_text + "'");
      const LinkCaps2 c{caps[0], caps[1], caps[2], caps[3]};
      const auto b = bounds2(c, power[0], power[1], search);
      std::ostream& info = b2_out.empty() ? std::cerr : std::cout;
      info << "lower   " << format_number(b.lower.value_bits) << "  binding " << b.lower.binding_label << "  "
           << params_text(b.lower) << "\n";
      info << "upper1  " << format_number(b.upper1.value_bits) << "  binding " << b.upper1.binding_label << "  "
           << params_text(b.upper1) << "\n";
      info << "upper2  " << format_number(b.upper2.value_bits) << "  binding " << b.upper2.binding_label << "  "
           << params_text(b.upper2) << "\n";
      info << "cutset  " << format_number(b.cutset) << "\n";
      emit(b2_out, [&](std::ostream& os) {
        CsvWriter w(os, {"c11", "c22", "c12", "c21", "p1", "p2", "lower", "upper1", "upper2", "cutset",
                         "binding_lower", "binding_upper1", "binding_upper2"});
        w.row_strings({format_number(c.c11), format_number(c.c22), format_number(c.c12), format_number(c.c21),
                       format_number(power[0]), format_number(power[1]), format_number(b.lower.value_bits),
                       format_number(b.upper1.value_bits), format_number(b.upper2.value_bits),
                       format_number(b.cutset), b.lower.binding_label, b.upper1.binding_label,
                       b.upper2.binding_label});
      });
      return 0;
    }

    if (s2->parsed() || s3->parsed()) {
      const auto c0 = parse_doubles("--c0", c0_text);
      require_nonnegative("--c0", c0);
      require_nonnegative("--c-min", {c_min});
      require_positive("--power", {sw_power});
      if (grid < 2) throw UsageError("--grid: must be at least 2");
      const auto cs = linspace(c_min, c_max, steps);
      std::vector<SweepRow> rows;
      if (s2->parsed()) {
        GridSpec g;
        g.points_per_axis = grid;
        rows = sweep2(cs, c0, sw_power, g);
      } else {
        Search3 g;
        g.points_per_axis = grid;
        rows = sweep3(cs, c0, sw_power, g);
      }
      emit(sw_out, [&](std::ostream& os) { write_sweep(os, rows); });
      return 0;
    }

    if (fm->parsed()) {
      LinearInequalitySystem sys;
      try {
        sys = system_from_json(read_json("--system", system_path));
      } catch (const ParseError& e) {
        throw UsageError(std::string("--system: ") + e.what());
      }
      const auto victims = split_names(eliminate_text);
      for (const auto& v : victims)
        if (std::find(sys.symbols.begin(), sys.symbols.end(), v) == sys.symbols.end())
          throw UsageError("--eliminate: unknown symbol '" + v + "'");
      EliminateOptions opt;
      opt.lp_redundancy = lp_prune;
      const auto rep = eliminate(sys, victims, opt);
      emit(fme_out, [&](std::ostream& os) { os << system_to_json(rep.result).dump(2) << "\n"; });
      std::ostream& info = fme_out.empty() ? std::cerr : std::cout;
      info << rep.result.rows.size() << " rows after eliminating " << victims.size() << " symbols (peak "
           << rep.peak_rows << ", dropped " << rep.dropped_redundant << ")\n";
      if (!golden_path.empty()) {
        LinearInequalitySystem golden;
        try {
          golden = system_from_json(read_json("--golden", golden_path));
        } catch (const ParseError& e) {
          throw UsageError(std::string("--golden: ") + e.what());
        }
        const auto aligned = reorder_symbols(rep.result, golden.symbols);
        if (check_equivalence(aligned, golden)) {
          info << "golden: match\n";
          return 0;
        }
        const auto diff = row_difference(aligned, golden);
        info << "golden: MISMATCH\n";
        for (const auto& r : diff.only_in_a) info << "  only in result: " << format_row(aligned.symbols, r) << "\n";
        for (const auto& r : diff.only_in_b) info << "  only in golden: " << format_row(golden.symbols, r) << "\n";
        return 1;
      }
      return 0;
    }

    if (mc->parsed()) {
      const auto ns = parse_n_list(n_list);
      if (trials == 0) throw UsageError("--trials: must be positive");
      const auto doc = read_json("--spec", spec_path);
      std::vector<PhaseRow> rows;
      try {
        if (mc_subs[0]->parsed()) {
          auto e = covering_from_json(doc);
          e.seed = seed;
          e.trials = trials;
          rows = phase_scan(e, ns, [](const CoveringExperiment& x) { return sim_covering(x); });
        } else if (mc_subs[1]->parsed()) {
          auto e = packing_from_json(doc);
          e.seed = seed;
          e.trials = trials;
          rows = phase_scan(e, ns, [](const PackingExperiment& x) { return sim_packing(x); });
        } else {
          auto e = codebook_size_from_json(doc);
          e.seed = seed;
          e.trials = trials;
          rows = phase_scan(e, ns, [](const CodebookSizeExperiment& x) { return sim_codebook_size(x); });
        }
      } catch (const ParseError& e) {
        throw UsageError(std::string("--spec: ") + e.what());
      }
      emit(mc_out, [&](std::ostream& os) { write_estimates(os, rows); });
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const GuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
