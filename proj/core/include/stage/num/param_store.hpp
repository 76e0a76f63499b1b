#pragma once

#include <map>
#include <string>
#include <string_view>

#include "stage/num/matrix.hpp"
#include "stage/num/rng.hpp"

namespace stage::num {

struct ParamEntry {
  DenseMatrix value;
  DenseMatrix grad;
};

// Named trainable tensors with matching gradient slots. Iteration order is
// the lexicographic name order, which every consumer relies on for
// deterministic accumulation.
class ParamStore {
 public:
  DenseMatrix& create(const std::string& name, std::size_t rows,
                      std::size_t cols);
  DenseMatrix& create_gaussian(const std::string& name, std::size_t rows,
                               std::size_t cols, Rng& rng, double scale);

  bool has(std::string_view name) const;
  DenseMatrix& value(std::string_view name);
  const DenseMatrix& value(std::string_view name) const;
  DenseMatrix& grad(std::string_view name);
  const DenseMatrix& grad(std::string_view name) const;

  void zero_grads();
  void sgd_step(double lr);

  std::size_t entry_count() const { return entries_.size(); }
  std::size_t total_params() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  bool operator==(const ParamStore& other) const = default;

 private:
  std::map<std::string, ParamEntry, std::less<>> entries_;
};

}  // namespace stage::num
