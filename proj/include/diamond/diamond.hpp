#pragma once

#include "diamond/errors.hpp"
#include "diamond/info_measures.hpp"
#include "diamond/gaussian_model.hpp"
#include "diamond/optimize.hpp"
#include "diamond/bounds_two_relay.hpp"
#include "diamond/bounds_three_relay.hpp"
#include "diamond/lp.hpp"
#include "diamond/fme.hpp"
#include "diamond/typicality.hpp"
#include "diamond/csv.hpp"
