#pragma once

#include "mdyn/data_model.hpp"

#include <cstdint>
#include <random>

namespace mdyn {

using Rng = std::mt19937_64;

/// Independent stream keyed by (base, a, b); the same key always yields the same stream.
Rng make_stream(std::uint64_t base, std::uint64_t a = 0, std::uint64_t b = 0);

/// n iid standard normal draws.
Vector standard_normal(Rng& rng, Eigen::Index n);
Matrix standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols);

}  // namespace mdyn
