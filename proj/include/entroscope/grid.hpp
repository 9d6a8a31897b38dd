#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace entroscope {

//! Axis-aligned box in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  static Box unit_cube(int d);
};

//! Deterministic pairwise reduction in fixed index order.  The result does
//! not depend on how the inputs were produced (thread count in particular).
double pairwise_sum(std::span<const double> values);

//! Number of worker threads: hardware concurrency capped by the
//! ENTROSCOPE_THREADS environment variable, and by `override_threads` if > 0.
int worker_threads(int override_threads = 0);

//! Static-partition parallel loop over [0, count).  `fn(i)` must only write
//! to state owned by index i.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn,
                  int override_threads = 0);

//! Midpoint tensor grid over `box` with `n_per_axis` cells per axis.
//! Calls `fn(point, cell_index)` for every cell midpoint; returns cell volume.
class MidpointGrid {
public:
  MidpointGrid(const Box& box, const std::vector<int>& n_per_axis);

  std::int64_t cell_count() const { return cells_; }
  double cell_volume() const { return cell_volume_; }
  int dim() const { return static_cast<int>(n_.size()); }
  int cells_on_axis(int axis) const { return n_[axis]; }

  //! Midpoint of cell `index` written into `out` (size d).
  void midpoint(std::int64_t index, std::span<double> out) const;

private:
  Box box_;
  std::vector<int> n_;
  std::vector<double> pitch_;
  std::int64_t cells_;
  double cell_volume_;
};

}  // namespace entroscope
