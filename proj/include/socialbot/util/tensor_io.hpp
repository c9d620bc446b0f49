#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "socialbot/util/jsonl.hpp"

namespace socialbot {

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

/// {"rows": r, "cols": c, "f64": base64(little-endian column-major doubles)}
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

}  // namespace socialbot
