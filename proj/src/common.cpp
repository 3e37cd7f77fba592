#include "plemelj/common.hpp"

namespace plemelj {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::degenerate_geometry: return "degenerate geometry";
    case ErrorKind::not_simple: return "curve is not simple";
    case ErrorKind::endpoint: return "point at curve endpoint";
    case ErrorKind::on_curve: return "point on curve";
    case ErrorKind::outside_window: return "point outside local frame";
    case ErrorKind::out_of_domain: return "outside tabulated domain";
    case ErrorKind::evaluation: return "density evaluation failed";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::schema: return "config schema error";
  }
  return "error";
}

}  // namespace plemelj
