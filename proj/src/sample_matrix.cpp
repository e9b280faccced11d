#include "hdmmd/sample_matrix.hpp"

#include "hdmmd/error.hpp"

namespace hdmmd {

SampleMatrix::SampleMatrix(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    fail(ErrorCode::InvalidArgument, "sample matrix needs at least one row and one column");
  }
  if (!data_.allFinite()) {
    fail(ErrorCode::InvalidArgument, "sample matrix contains non-finite entries");
  }
}

}  // namespace hdmmd
