#include "entroscope/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace entroscope {

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
  return v;
}

Box Box::unit_cube(int d) {
  Box b;
  b.lo.assign(d, 0.0);
  b.hi.assign(d, 1.0);
  return b;
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

int worker_threads(int override_threads) {
  if (override_threads > 0) return override_threads;
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("ENTROSCOPE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn,
                  int override_threads) {
  if (count <= 0) return;
  const int threads = std::min<std::int64_t>(worker_threads(override_threads), count);
  if (threads <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::int64_t chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::int64_t begin = t * chunk;
    const std::int64_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::int64_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

MidpointGrid::MidpointGrid(const Box& box, const std::vector<int>& n_per_axis)
    : box_(box), n_(n_per_axis) {
  if (box.dim() != static_cast<int>(n_per_axis.size()))
    throw std::invalid_argument("MidpointGrid: dimension mismatch");
  cells_ = 1;
  cell_volume_ = 1.0;
  pitch_.resize(n_.size());
  for (std::size_t i = 0; i < n_.size(); ++i) {
    if (n_[i] <= 0) throw std::invalid_argument("MidpointGrid: cells per axis must be positive");
    pitch_[i] = (box_.hi[i] - box_.lo[i]) / n_[i];
    cells_ *= n_[i];
    cell_volume_ *= pitch_[i];
  }
}

void MidpointGrid::midpoint(std::int64_t index, std::span<double> out) const {
  for (std::size_t ax = 0; ax < n_.size(); ++ax) {
    const std::int64_t j = index % n_[ax];
    index /= n_[ax];
    out[ax] = box_.lo[ax] + (static_cast<double>(j) + 0.5) * pitch_[ax];
  }
}

}  // namespace entroscope
