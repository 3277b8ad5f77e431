#include "enkf/state.hpp"

#include <stdexcept>

namespace enkf {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::lorenz63: return "lorenz63";
    case ModelKind::lorenz96: return "lorenz96";
    case ModelKind::nse2d: return "nse2d";
    case ModelKind::linear: return "linear";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lorenz63") return ModelKind::lorenz63;
  if (name == "lorenz96") return ModelKind::lorenz96;
  if (name == "nse2d") return ModelKind::nse2d;
  if (name == "linear") return ModelKind::linear;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

void require_compatible(const StateVector& a, const StateVector& b,
                        std::string_view what) {
  if (a.kind != b.kind) {
    throw std::invalid_argument(std::string(what) + ": model kind mismatch (" +
                                std::string(to_string(a.kind)) + " vs " +
                                std::string(to_string(b.kind)) + ")");
  }
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()) + ")");
  }
}

StateVector& StateVector::operator+=(const StateVector& o) {
  require_compatible(*this, o, "StateVector +=");
  data += o.data;
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& o) {
  require_compatible(*this, o, "StateVector -=");
  data -= o.data;
  return *this;
}

double dot(const StateVector& a, const StateVector& b) {
  require_compatible(a, b, "dot");
  return a.data.dot(b.data);
}

}  // namespace enkf
