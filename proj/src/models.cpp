#include "dsdr/models.hpp"

#include "dsdr/error.hpp"
#include "dsdr/rng.hpp"

namespace dsdr {

std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::I: return "I";
    case ModelId::II: return "II";
    case ModelId::III: return "III";
    case ModelId::IV: return "IV";
  }
  return "?";
}

ModelId parse_model(std::string_view text) {
  if (text == "I" || text == "1") return ModelId::I;
  if (text == "II" || text == "2") return ModelId::II;
  if (text == "III" || text == "3") return ModelId::III;
  if (text == "IV" || text == "4") return ModelId::IV;
  throw Error(ErrorKind::InvalidArgument, "unknown model '" + std::string(text) + "'");
}

double model_response(ModelId id, double x1, double x2, double eps) {
  const double ratio = x1 / (0.5 + (x2 + 1.0) * (x2 + 1.0));
  const double quad = x1 * (x1 + x2 + 1.0);
  switch (id) {
    case ModelId::I: return ratio + eps;
    case ModelId::II: return quad + eps;
    case ModelId::III: return ratio + eps > 0 ? 1.0 : -1.0;
    case ModelId::IV: return quad + eps > 0 ? 1.0 : -1.0;
  }
  return 0.0;
}

SimulatedData generate_model(const ModelSpec& spec) {
  if (spec.p < 2) throw Error(ErrorKind::InvalidArgument, "models need p >= 2");
  if (spec.n < 1) throw Error(ErrorKind::InvalidArgument, "models need n >= 1");
  if (!(spec.noise_sd >= 0)) throw Error(ErrorKind::InvalidArgument, "noise_sd must be >= 0");

  Rng rng(spec.seed);
  SimulatedData out;
  out.data.x.resize(spec.n, spec.p);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    for (Eigen::Index j = 0; j < spec.p; ++j) out.data.x(i, j) = rng.normal();
  }
  out.data.y.resize(spec.n);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    const double eps = spec.noise_sd * rng.normal();
    out.data.y(i) = model_response(spec.model_id, out.data.x(i, 0), out.data.x(i, 1), eps);
  }
  out.true_basis = Matrix::Zero(spec.p, 2);
  out.true_basis(0, 0) = 1.0;
  out.true_basis(1, 1) = 1.0;
  return out;
}

}  // namespace dsdr
