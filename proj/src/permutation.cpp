#include "equisym/permutation.hpp"

#include <string>

namespace equisym {

void check_config(const ParticleConfig& X) {
  if (X.rows() < 1 || X.cols() < 1) throw ShapeError("particle configuration needs d >= 1 and n >= 1");
  if (!X.allFinite()) throw ShapeError("particle configuration has non-finite entries");
}

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  const int n = size();
  std::vector<bool> seen(images_.size(), false);
  for (int v : images_) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)])
      throw ShapeError("Permutation: images are not a bijection on {1.." + std::to_string(n) + "}");
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> images(static_cast<std::size_t>(n));
  std::iota(images.begin(), images.end(), 0);
  return Permutation(std::move(images));
}

Permutation Permutation::from_one_based(const std::vector<int>& images) {
  std::vector<int> zero(images.size());
  std::transform(images.begin(), images.end(), zero.begin(), [](int v) { return v - 1; });
  return Permutation(std::move(zero));
}

std::vector<int> Permutation::one_based() const {
  std::vector<int> out(images_.size());
  std::transform(images_.begin(), images_.end(), out.begin(), [](int v) { return v + 1; });
  return out;
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(images_.size());
  for (int i = 0; i < size(); ++i) inv[static_cast<std::size_t>(images_[static_cast<std::size_t>(i)])] = i;
  return Permutation(std::move(inv));
}

int Permutation::parity() const {
  std::vector<bool> visited(images_.size(), false);
  int transpositions = 0;
  for (int start = 0; start < size(); ++start) {
    if (visited[static_cast<std::size_t>(start)]) continue;
    int length = 0;
    for (int j = start; !visited[static_cast<std::size_t>(j)]; j = images_[static_cast<std::size_t>(j)]) {
      visited[static_cast<std::size_t>(j)] = true;
      ++length;
    }
    transpositions += length - 1;
  }
  return transpositions % 2 == 0 ? 1 : -1;
}

Permutation compose(const Permutation& p, const Permutation& q) {
  if (p.size() != q.size()) throw ShapeError("compose: permutation sizes differ");
  std::vector<int> images(static_cast<std::size_t>(p.size()));
  for (int i = 0; i < p.size(); ++i) images[static_cast<std::size_t>(i)] = p[q[i]];
  return Permutation(std::move(images));
}

std::vector<Permutation> enumerate(int n) {
  std::vector<Permutation> out;
  for_each_permutation(n, [&](const Permutation& p) { out.push_back(p); });
  return out;
}

double ordered_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end(), [](double a, double b) {
    const double fa = std::abs(a), fb = std::abs(b);
    return fa < fb || (fa == fb && a < b);
  });
  double sum = 0.0, carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

namespace {

double weighted_orbit_mean(const ScalarFunction& f, const ParticleConfig& X, bool signed_weights) {
  check_config(X);
  const int n = static_cast<int>(X.cols());
  std::vector<double> values;
  double count = 0.0;
  for_each_permutation(n, [&](const Permutation& p) {
    const double v = f(apply(p, X));
    values.push_back(signed_weights && p.parity() < 0 ? -v : v);
    count += 1.0;
  });
  return ordered_sum(std::move(values)) / count;
}

} // namespace

double symmetrize(const ScalarFunction& f, const ParticleConfig& X) {
  return weighted_orbit_mean(f, X, false);
}

double antisymmetrize(const ScalarFunction& f, const ParticleConfig& X) {
  return weighted_orbit_mean(f, X, true);
}

} // namespace equisym
