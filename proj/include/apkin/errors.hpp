#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace apkin {

/// Precondition violated by a caller-supplied value.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Collision kernel fails its bound or symmetry requirements at some node pair.
class InvalidKernel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear solve was singular or a result stopped being finite.
///
/// Carries the face index of the offending per-face solve and, once it has
/// propagated through a time loop, the step index.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what,
                            std::optional<std::size_t> face = std::nullopt,
                            std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(what), message_(what), face_(face), step_(step) {}

  std::optional<std::size_t> face() const noexcept { return face_; }
  std::optional<std::size_t> step() const noexcept { return step_; }
  const std::string& message() const noexcept { return message_; }

  NumericalFailure at_step(std::size_t step) const {
    return NumericalFailure(message_ + " (step " + std::to_string(step) + ")",
                            face_, step);
  }

 private:
  std::string message_;
  std::optional<std::size_t> face_;
  std::optional<std::size_t> step_;
};

/// Configuration text rejected; line is 1-based, 0 when the key was missing.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string key, const std::string& what)
      : std::runtime_error(format(line, key, what)),
        line_(line),
        key_(std::move(key)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(std::size_t line, const std::string& key,
                            const std::string& what) {
    std::string out = "config";
    if (line > 0) out += ":" + std::to_string(line);
    if (!key.empty()) out += ": " + key;
    return out + ": " + what;
  }

  std::size_t line_;
  std::string key_;
};

}  // namespace apkin
