#pragma once

#include <stdexcept>
#include <string>

namespace wmr {

enum class ErrorKind {
  invalid_argument,
  invalid_layout,
  shape_error,
  numeric_error,
  render_error,
  dataset_error,
  dataset_write_error,
  write_error,
  landmark_not_found,
  landmark_ambiguous,
  degenerate_configuration,
  insufficient_points,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Carries the canonical color id (0..3) of the landmark that failed.
class LandmarkError : public Error {
 public:
  LandmarkError(ErrorKind kind, int color_id, const std::string& what)
      : Error(kind, what), color_id_(color_id) {}

  int color_id() const noexcept { return color_id_; }

 private:
  int color_id_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_layout: return "invalid-layout";
    case ErrorKind::shape_error: return "shape-error";
    case ErrorKind::numeric_error: return "numeric-error";
    case ErrorKind::render_error: return "render-error";
    case ErrorKind::dataset_error: return "dataset-error";
    case ErrorKind::dataset_write_error: return "dataset-write-error";
    case ErrorKind::write_error: return "write-error";
    case ErrorKind::landmark_not_found: return "landmark-not-found";
    case ErrorKind::landmark_ambiguous: return "landmark-ambiguous";
    case ErrorKind::degenerate_configuration: return "degenerate-configuration";
    case ErrorKind::insufficient_points: return "insufficient-points";
  }
  return "unknown";
}

}  // namespace wmr
