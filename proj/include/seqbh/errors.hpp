#pragma once

#include <stdexcept>
#include <string>

namespace seqbh {

// A data source ran dry before the procedure reached a decision for that stream.
class stream_underrun : public std::runtime_error {
 public:
  stream_underrun(int stream, long long n)
      : std::runtime_error("stream underrun: stream " + std::to_string(stream) +
                           " has no observation at n=" + std::to_string(n)),
        stream_(stream),
        n_(n) {}

  int stream() const { return stream_; }
  long long n() const { return n_; }

 private:
  int stream_;
  long long n_;
};

// A numeric routine left its supported regime (overflow, failed convergence, ...).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Cholesky pivot failure; names the first non-positive pivot.
class not_positive_definite : public numerical_error {
 public:
  explicit not_positive_definite(int pivot)
      : numerical_error("matrix is not positive definite: pivot " + std::to_string(pivot) +
                        " is not positive"),
        pivot_(pivot) {}

  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

}  // namespace seqbh
