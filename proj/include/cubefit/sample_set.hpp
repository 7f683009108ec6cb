#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace cubefit {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class TruthLabel : std::uint8_t { inlier, outlier, deleted_by_adversary };

class SampleSet;

// The estimator-facing handle: points plus a private copy of the active
// mask the algorithm may shrink. Deliberately label-free — estimators can
// never read ground truth, only evaluation code working on the SampleSet can.
struct SampleView {
  const Matrix* points = nullptr;
  std::vector<std::uint8_t> active;

  Index n() const { return points->rows(); }
  int d() const { return static_cast<int>(points->cols()); }
  bool is_active(Index i) const { return active[static_cast<std::size_t>(i)] != 0; }
  void deactivate(Index i) { active[static_cast<std::size_t>(i)] = 0; }
  void reactivate(Index i) { active[static_cast<std::size_t>(i)] = 1; }
  Index active_count() const {
    Index c = 0;
    for (auto a : active) c += (a != 0);
    return c;
  }
  Eigen::Ref<const Eigen::RowVectorXd> point(Index i) const { return points->row(i); }
};

class SampleSet {
 public:
  SampleSet() = default;
  SampleSet(Matrix points, std::vector<std::uint8_t> active, std::vector<TruthLabel> labels);

  // all active, all inlier
  static SampleSet from_points(Matrix points);

  Index n() const { return points_.rows(); }
  int d() const { return static_cast<int>(points_.cols()); }

  const Matrix& points() const { return points_; }
  Matrix& mutable_points() { return points_; }

  const std::vector<std::uint8_t>& active() const { return active_; }
  const std::vector<TruthLabel>& labels() const { return labels_; }

  void set_point(Index i, const Vector& x) { points_.row(i) = x.transpose(); }
  void set_active(Index i, bool a) { active_[static_cast<std::size_t>(i)] = a ? 1 : 0; }
  void set_label(Index i, TruthLabel l) { labels_[static_cast<std::size_t>(i)] = l; }

  Index count(TruthLabel l) const;

  SampleView view() const { return SampleView{&points_, active_}; }

  // same points and mask with all labels reset to inlier; used by the
  // label-firewall test to prove estimators cannot depend on truth labels
  SampleSet stripped() const;

 private:
  Matrix points_;
  std::vector<std::uint8_t> active_;
  std::vector<TruthLabel> labels_;
};

}  // namespace cubefit
