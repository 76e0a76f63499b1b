#include "stage/num/param_store.hpp"

#include <stdexcept>

namespace stage::num {

DenseMatrix& ParamStore::create(const std::string& name, std::size_t rows,
                                std::size_t cols) {
  auto [it, inserted] =
      entries_.emplace(name, ParamEntry{DenseMatrix(rows, cols),
                                        DenseMatrix(rows, cols)});
  if (!inserted) {
    throw std::invalid_argument("ParamStore: duplicate entry '" + name + "'");
  }
  return it->second.value;
}

DenseMatrix& ParamStore::create_gaussian(const std::string& name,
                                         std::size_t rows, std::size_t cols,
                                         Rng& rng, double scale) {
  DenseMatrix& m = create(name, rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = scale * rng.normal();
  }
  return m;
}

bool ParamStore::has(std::string_view name) const {
  return entries_.find(name) != entries_.end();
}

DenseMatrix& ParamStore::value(std::string_view name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::out_of_range("ParamStore: unknown entry '" +
                                std::string(name) + "'");
  }
  return it->second.value;
}

const DenseMatrix& ParamStore::value(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::out_of_range("ParamStore: unknown entry '" +
                                std::string(name) + "'");
  }
  return it->second.value;
}

DenseMatrix& ParamStore::grad(std::string_view name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::out_of_range("ParamStore: unknown entry '" +
                                std::string(name) + "'");
  }
  return it->second.grad;
}

const DenseMatrix& ParamStore::grad(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::out_of_range("ParamStore: unknown entry '" +
                                std::string(name) + "'");
  }
  return it->second.grad;
}

void ParamStore::zero_grads() {
  for (auto& [name, entry] : entries_) entry.grad.fill(0.0);
}

void ParamStore::sgd_step(double lr) {
  for (auto& [name, entry] : entries_) {
    entry.value.add_scaled(entry.grad, -lr);
  }
}

std::size_t ParamStore::total_params() const {
  std::size_t n = 0;
  for (const auto& [name, entry] : entries_) n += entry.value.size();
  return n;
}

}  // namespace stage::num
