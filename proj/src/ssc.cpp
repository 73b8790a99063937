#include "panocc/ssc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "panocc/camera.hpp"
#include "panocc/error.hpp"
#include "panocc/parallel.hpp"

namespace panocc {
namespace {

// log clamped at -100, the binary cross-entropy convention.
double safe_log(double x) { return x > 0.0 ? std::max(std::log(x), -100.0) : -100.0; }

void check_pair(const LogitVolume& z, const OccupancyGrid& gt) {
  z.validate();
  if (!(z.dims == gt.dims) || gt.labels.size() != gt.dims.count()) {
    throw Error(ErrorCode::DimMismatch, "logits and ground truth differ in shape");
  }
}

// Voxels that are valid and carry a non-IGNORE label.
std::vector<std::size_t> supervised_voxels(const LogitVolume& z, const OccupancyGrid& gt) {
  check_pair(z, gt);
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < gt.labels.size(); ++v) {
    const auto label = gt.labels[v];
    if (label == kIgnoreLabel || !z.is_valid(v)) continue;
    if (label >= z.classes) {
      throw Error(ErrorCode::OutOfRange, "label " + std::to_string(label) + " >= class count " +
                                             std::to_string(z.classes));
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::NoSupervisedVoxels, "no valid, labelled voxel");
  return out;
}

// Softmax probabilities of the supervised voxels, row-major (voxel, class).
std::vector<double> probabilities(const LogitVolume& z, std::span<const std::size_t> voxels) {
  const auto classes = static_cast<std::size_t>(z.classes);
  std::vector<double> probs(voxels.size() * classes);
  parallel_for(voxels.size(), [&](std::size_t m) {
    const auto logits = z.at(voxels[m]);
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    double* row = probs.data() + m * classes;
    for (std::size_t c = 0; c < classes; ++c) {
      row[c] = std::exp(logits[c] - peak);
      total += row[c];
    }
    for (std::size_t c = 0; c < classes; ++c) row[c] /= total;
  });
  return probs;
}

// Affinity loss over `classes` columns of `probs` against `labels`.
double scal_from(std::span<const double> probs, std::span<const std::uint8_t> labels,
                 std::size_t classes) {
  const std::size_t n = labels.size();
  std::vector<double> hits(n), mass(n), negatives(n);
  double loss = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t positives = 0;
    for (std::size_t m = 0; m < n; ++m) {
      const double p = probs[m * classes + c];
      const bool is_c = labels[m] == c;
      positives += is_c ? 1 : 0;
      hits[m] = is_c ? p : 0.0;
      mass[m] = p;
      negatives[m] = is_c ? 0.0 : 1.0 - p;
    }
    if (positives == 0) continue;
    ++present;
    const double tp = pairwise_sum(hits);
    const double predicted = pairwise_sum(mass);
    double term = 0.0;
    if (predicted > 0.0) term += safe_log(tp / predicted);
    term += safe_log(tp / static_cast<double>(positives));
    const std::size_t n_neg = n - positives;
    if (n_neg > 0) term += safe_log(pairwise_sum(negatives) / static_cast<double>(n_neg));
    loss -= term;
  }
  return loss / static_cast<double>(present);
}

}  // namespace

void LogitVolume::validate() const {
  if (classes < 2) throw Error(ErrorCode::InvalidArgument, "logit volume needs at least 2 classes");
  if (data.size() != dims.count() * static_cast<std::size_t>(classes)) {
    throw Error(ErrorCode::DimMismatch, "logit data does not match voxels x classes");
  }
  if (!valid.empty() && valid.size() != dims.count()) {
    throw Error(ErrorCode::DimMismatch, "validity mask does not match voxel count");
  }
}

OccupancyGrid argmax_labels(const LogitVolume& z) {
  z.validate();
  OccupancyGrid out(z.dims);
  parallel_for(z.voxel_count(), [&](std::size_t v) {
    if (!z.is_valid(v)) {
      out.labels[v] = kIgnoreLabel;
      return;
    }
    const auto logits = z.at(v);
    // max_element returns the first maximum, i.e. the lowest class on ties.
    out.labels[v] = static_cast<std::uint8_t>(
        std::distance(logits.begin(), std::max_element(logits.begin(), logits.end())));
  });
  return out;
}

std::vector<double> inverse_log_class_weights(std::span<const double> frequencies) {
  std::vector<double> w(frequencies.size());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = 1.0 / std::log(1.02 + frequencies[c]);
  return w;
}

double ce_loss(const LogitVolume& z, const OccupancyGrid& gt, std::span<const double> class_weights) {
  const auto voxels = supervised_voxels(z, gt);
  if (!class_weights.empty() && class_weights.size() != static_cast<std::size_t>(z.classes)) {
    throw Error(ErrorCode::DimMismatch, "need one class weight per class");
  }
  std::vector<double> weighted(voxels.size()), weights(voxels.size());
  parallel_for(voxels.size(), [&](std::size_t m) {
    const std::size_t v = voxels[m];
    const auto logits = z.at(v);
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double l : logits) total += std::exp(l - peak);
    const auto label = gt.labels[v];
    const double nll = std::log(total) + peak - logits[label];
    const double w = class_weights.empty() ? 1.0 : class_weights[label];
    weighted[m] = w * nll;
    weights[m] = w;
  });
  const double denom = pairwise_sum(weights);
  if (!(denom > 0.0)) throw Error(ErrorCode::NoSupervisedVoxels, "class weights sum to zero");
  return pairwise_sum(weighted) / denom;
}

double scal_loss(const LogitVolume& z, const OccupancyGrid& gt, ScalMode mode) {
  const auto voxels = supervised_voxels(z, gt);
  const auto probs = probabilities(z, voxels);
  const auto classes = static_cast<std::size_t>(z.classes);
  std::vector<std::uint8_t> labels(voxels.size());
  if (mode == ScalMode::Semantic) {
    for (std::size_t m = 0; m < voxels.size(); ++m) labels[m] = gt.labels[voxels[m]];
    return scal_from(probs, labels, classes);
  }
  std::vector<double> binary(voxels.size() * 2);
  for (std::size_t m = 0; m < voxels.size(); ++m) {
    const double* row = probs.data() + m * classes;
    double occupied = 0.0;
    for (std::size_t c = 1; c < classes; ++c) occupied += row[c];
    binary[2 * m] = row[0];
    binary[2 * m + 1] = occupied;
    labels[m] = gt.labels[voxels[m]] == 0 ? 0 : 1;
  }
  return scal_from(binary, labels, 2);
}

std::size_t frustum_sector(const GridDims& dims, std::size_t i, std::size_t j, std::size_t sectors) {
  const double cx = static_cast<double>(dims.nx) / 2.0;
  const double cy = static_cast<double>(dims.ny) / 2.0;
  const double phi = wrap_azimuth(std::atan2(static_cast<double>(j) + 0.5 - cy,
                                             static_cast<double>(i) + 0.5 - cx));
  const double t = (phi + std::numbers::pi) / (2.0 * std::numbers::pi) * static_cast<double>(sectors);
  return std::min(sectors - 1, static_cast<std::size_t>(std::max(0.0, std::floor(t))));
}

double fp_loss(const LogitVolume& z, const OccupancyGrid& gt, std::size_t sectors) {
  if (sectors < 1) throw Error(ErrorCode::InvalidArgument, "need at least one frustum");
  const auto voxels = supervised_voxels(z, gt);
  const auto probs = probabilities(z, voxels);
  const auto classes = static_cast<std::size_t>(z.classes);
  const GridDims& d = z.dims;

  std::vector<std::vector<std::size_t>> members(sectors);
  for (std::size_t m = 0; m < voxels.size(); ++m) {
    const std::size_t v = voxels[m];
    members[frustum_sector(d, v % d.nx, (v / d.nx) % d.ny, sectors)].push_back(m);
  }

  double loss = 0.0;
  std::size_t used = 0;
  std::vector<double> column;
  for (const auto& group : members) {
    if (group.empty()) continue;
    ++used;
    const auto count = static_cast<double>(group.size());
    column.resize(group.size());
    double kl = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      std::size_t hits = 0;
      for (std::size_t n = 0; n < group.size(); ++n) {
        hits += gt.labels[voxels[group[n]]] == c ? 1 : 0;
        column[n] = probs[group[n] * classes + c];
      }
      if (hits == 0) continue;
      const double q = static_cast<double>(hits) / count;
      const double p = pairwise_sum(column) / count;
      kl += q * (std::log(q) - safe_log(p));
    }
    loss += kl;
  }
  return loss / static_cast<double>(used);
}

LossBreakdown total_loss(const LogitVolume& z, const OccupancyGrid& gt, const LossConfig& config) {
  LossBreakdown out;
  out.ce = ce_loss(z, gt, config.class_weights);
  out.scal_sem = scal_loss(z, gt, ScalMode::Semantic);
  out.scal_geo = scal_loss(z, gt, ScalMode::Geometric);
  out.fp = fp_loss(z, gt, config.fp_sectors);
  out.total = out.ce + out.scal_sem + out.scal_geo + out.fp;
  return out;
}

SscMetrics::SscMetrics(int num_classes)
    : num_classes_(num_classes),
      tp_(static_cast<std::size_t>(std::max(num_classes, 0)), 0),
      fp_(tp_.size(), 0),
      fn_(tp_.size(), 0) {
  if (num_classes < 2 || num_classes > kIgnoreLabel) {
    throw Error(ErrorCode::InvalidArgument, "class count must be in [2, 255]");
  }
}

void SscMetrics::add(const OccupancyGrid& pred, const OccupancyGrid& gt) {
  if (!(pred.dims == gt.dims) || pred.labels.size() != gt.labels.size() ||
      gt.labels.size() != gt.dims.count()) {
    throw Error(ErrorCode::DimMismatch, "prediction and ground truth differ in shape");
  }
  for (std::size_t v = 0; v < gt.labels.size(); ++v) {
    const auto p = pred.labels[v];
    const auto g = gt.labels[v];
    if (p == kIgnoreLabel || g == kIgnoreLabel) continue;
    if (p >= num_classes_ || g >= num_classes_) {
      throw Error(ErrorCode::OutOfRange, "label outside the class table");
    }
    const bool p_occ = p != 0;
    const bool g_occ = g != 0;
    geom_tp_ += (p_occ && g_occ) ? 1 : 0;
    geom_fp_ += (p_occ && !g_occ) ? 1 : 0;
    geom_fn_ += (!p_occ && g_occ) ? 1 : 0;
    if (p == g) {
      ++tp_[p];
    } else {
      ++fp_[p];
      ++fn_[g];
    }
  }
}

SscReport SscMetrics::report() const {
  const auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  SscReport r;
  r.num_classes = num_classes_;
  r.tp = tp_;
  r.fp = fp_;
  r.fn = fn_;
  r.geom_tp = geom_tp_;
  r.geom_fp = geom_fp_;
  r.geom_fn = geom_fn_;
  r.precision = ratio(geom_tp_, geom_tp_ + geom_fp_);
  r.recall = ratio(geom_tp_, geom_tp_ + geom_fn_);
  r.geom_iou = ratio(geom_tp_, geom_tp_ + geom_fp_ + geom_fn_);
  double sum = 0.0;
  std::size_t present = 0;
  for (int c = 1; c < num_classes_; ++c) {
    r.per_class_iou.push_back(ratio(tp_[c], tp_[c] + fp_[c] + fn_[c]));
    const bool in_gt = tp_[c] + fn_[c] > 0;
    r.class_present.push_back(in_gt ? 1 : 0);
    if (in_gt) {
      sum += r.per_class_iou.back();
      ++present;
    }
  }
  r.miou = present == 0 ? 0.0 : sum / static_cast<double>(present);
  return r;
}

SscReport ssc_metrics(const OccupancyGrid& pred, const OccupancyGrid& gt, int num_classes) {
  SscMetrics m(num_classes);
  m.add(pred, gt);
  return m.report();
}

}  // namespace panocc
