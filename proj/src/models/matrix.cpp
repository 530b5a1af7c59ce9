#include "factorforge/models/matrix.hpp"

#include "factorforge/error.hpp"

namespace factorforge {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw Error("matrix data size does not match shape");
}

}  // namespace factorforge
