#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaitid {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), message_(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    /// The description without the line suffix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::size_t line_;
};

class EmptyInputError : public Error { using Error::Error; };
class InvalidParameterError : public Error { using Error::Error; };
class InvalidInputError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class DegenerateInputError : public Error { using Error::Error; };
class TrainingError : public Error { using Error::Error; };
class InvalidLabelError : public Error { using Error::Error; };
class StratificationError : public Error { using Error::Error; };
class OptimizationError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw InvalidParameterError(what);
}

template <class E>
inline void require(bool ok, const std::string& what) {
    if (!ok) throw E(what);
}

}  // namespace detail

}  // namespace gaitid
