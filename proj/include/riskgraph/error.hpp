#pragma once

#include <stdexcept>
#include <string>

namespace riskgraph {

// Bad inputs or configuration: CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures during an otherwise valid run: CLI maps these to exit code 2.
class PipelineError : public std::runtime_error {
 public:
  explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace riskgraph
