#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace psgleco {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// AA^T is numerically rank deficient: A violates the full-row-rank assumption.
class RankDeficientError : public Error {
public:
    RankDeficientError(std::int64_t pivot_index, double pivot, double threshold)
        : Error("rank-deficient constraint matrix: Cholesky pivot " +
                std::to_string(pivot) + " at index " + std::to_string(pivot_index) +
                " below threshold " + std::to_string(threshold)),
          pivot_index(pivot_index), pivot(pivot), threshold(threshold) {}
    std::int64_t pivot_index;
    double pivot;
    double threshold;
};

// CG met a direction of (numerically) zero curvature; the normal-equations
// operator has lost positive definiteness.
class CgBreakdownError : public Error {
public:
    explicit CgBreakdownError(int iteration)
        : Error("conjugate gradient breakdown at inner iteration " +
                std::to_string(iteration)),
          iteration(iteration) {}
    int iteration;
};

class InvalidBatchSizeError : public Error {
public:
    InvalidBatchSizeError(std::int64_t batch_size, std::int64_t total)
        : Error("invalid batch size " + std::to_string(batch_size) +
                " for " + std::to_string(total) + " components") {}
};

// Non-finite value met while evaluating an objective or one of its gradients.
class ObjectiveError : public Error {
public:
    explicit ObjectiveError(const std::string& msg) : Error(msg) {}
};

class GenerationError : public Error {
public:
    explicit GenerationError(const std::string& msg) : Error(msg) {}
};

// Errors raised while reading or transforming datasets.
class DataError : public Error {
public:
    enum class Kind {
        malformed_line,
        nonmonotone_index,
        empty_file,
        unmapped_label,
        empty_result,
        io
    };

    DataError(Kind kind, const std::string& msg, std::int64_t line = 0,
              std::int64_t column = 0)
        : Error(msg), kind(kind), line(line), column(column) {}

    Kind kind;
    std::int64_t line;    // 1-based, 0 when not applicable
    std::int64_t column;  // 1-based, 0 when not applicable
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace psgleco
