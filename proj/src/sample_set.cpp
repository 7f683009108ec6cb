#include "cubefit/sample_set.hpp"

#include <stdexcept>

namespace cubefit {

SampleSet::SampleSet(Matrix points, std::vector<std::uint8_t> active,
                     std::vector<TruthLabel> labels)
    : points_(std::move(points)), active_(std::move(active)), labels_(std::move(labels)) {
  const auto n = static_cast<std::size_t>(points_.rows());
  if (active_.size() != n || labels_.size() != n)
    throw std::invalid_argument("SampleSet: mask/label size mismatch");
}

SampleSet SampleSet::from_points(Matrix points) {
  const auto n = static_cast<std::size_t>(points.rows());
  return SampleSet(std::move(points), std::vector<std::uint8_t>(n, 1),
                   std::vector<TruthLabel>(n, TruthLabel::inlier));
}

Index SampleSet::count(TruthLabel l) const {
  Index c = 0;
  for (auto x : labels_) c += (x == l);
  return c;
}

SampleSet SampleSet::stripped() const {
  return SampleSet(points_, active_,
                   std::vector<TruthLabel>(labels_.size(), TruthLabel::inlier));
}

}  // namespace cubefit
