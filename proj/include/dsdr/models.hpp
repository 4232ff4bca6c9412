#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "dsdr/psvm.hpp"

namespace dsdr {

enum class ModelId { I, II, III, IV };

std::string_view to_string(ModelId id);
/// Accepts "I".."IV" (also "1".."4"); throws InvalidArgument otherwise.
ModelId parse_model(std::string_view text);

struct ModelSpec {
  ModelId model_id = ModelId::I;
  Eigen::Index n = 1000;
  Eigen::Index p = 10;
  double noise_sd = 0.5;
  std::uint64_t seed = 1;
};

struct SimulatedData {
  Dataset data;
  Matrix true_basis;  // p x 2, (e1, e2)
};

/// Noise-free signal for one row:
///   I:  x1 / (0.5 + (x2 + 1)^2)      II: x1 (x1 + x2 + 1)
/// III and IV take the sign of (signal + eps) with sign(0) = -1.
double model_response(ModelId id, double x1, double x2, double eps);

/// X ~ N(0, I_p) row by row from one stream, then eps ~ N(0, noise_sd^2)
/// from the same stream. Bit-identical for equal specs.
SimulatedData generate_model(const ModelSpec& spec);

}  // namespace dsdr
