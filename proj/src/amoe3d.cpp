#include "panocc/amoe3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "panocc/error.hpp"
#include "panocc/parallel.hpp"

namespace panocc {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

void check_size(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + " has " + std::to_string(v.size()) +
                                              " entries, expected " + std::to_string(n));
  }
}

// Zero-padded cross-correlation of `inputs` (each one map over `dims`) with a
// kernel laid out [input][dz][dy][dx] of odd size `k`.
std::vector<double> conv3d(std::span<const std::vector<double>> inputs, const GridDims& dims,
                           std::span<const double> kernel, double bias, int k) {
  const long r = k / 2;
  const auto nx = static_cast<long>(dims.nx);
  const auto ny = static_cast<long>(dims.ny);
  const auto nz = static_cast<long>(dims.nz);
  const std::size_t taps = static_cast<std::size_t>(k) * k * k;
  std::vector<double> out(dims.count());
  parallel_for(dims.count(), [&](std::size_t v) {
    const long i = static_cast<long>(v % dims.nx);
    const long j = static_cast<long>((v / dims.nx) % dims.ny);
    const long kk = static_cast<long>(v / (dims.nx * dims.ny));
    double acc = bias;
    for (std::size_t m = 0; m < inputs.size(); ++m) {
      const auto& map = inputs[m];
      const double* w = kernel.data() + m * taps;
      for (long dz = -r; dz <= r; ++dz) {
        const long z = kk + dz;
        if (z < 0 || z >= nz) continue;
        for (long dy = -r; dy <= r; ++dy) {
          const long y = j + dy;
          if (y < 0 || y >= ny) continue;
          for (long dx = -r; dx <= r; ++dx) {
            const long x = i + dx;
            if (x < 0 || x >= nx) continue;
            const std::size_t tap = static_cast<std::size_t>(((dz + r) * k + (dy + r)) * k + (dx + r));
            acc += w[tap] * map[static_cast<std::size_t>((z * ny + y) * nx + x)];
          }
        }
      }
    }
    out[v] = acc;
  });
  return out;
}

std::vector<double> channel_mlp(const SaliencyParams& p, std::span<const double> x) {
  std::vector<double> hidden(static_cast<std::size_t>(p.hidden));
  for (int h = 0; h < p.hidden; ++h) {
    double acc = p.mlp_b1[h];
    for (int c = 0; c < p.channels; ++c) acc += p.mlp_w1[h * p.channels + c] * x[c];
    hidden[h] = std::max(0.0, acc);
  }
  std::vector<double> out(static_cast<std::size_t>(p.channels));
  for (int c = 0; c < p.channels; ++c) {
    double acc = p.mlp_b2[c];
    for (int h = 0; h < p.hidden; ++h) acc += p.mlp_w2[c * p.hidden + h] * hidden[h];
    out[c] = acc;
  }
  return out;
}

}  // namespace

PointwiseAffine PointwiseAffine::identity(int channels) {
  PointwiseAffine a = zeros(channels, channels);
  for (int c = 0; c < channels; ++c) a.weights[c * channels + c] = 1.0;
  return a;
}

PointwiseAffine PointwiseAffine::zeros(int in, int out) {
  return {in, out, std::vector<double>(static_cast<std::size_t>(in) * out, 0.0),
          std::vector<double>(static_cast<std::size_t>(out), 0.0)};
}

void PointwiseAffine::validate() const {
  if (in < 1 || out < 1) throw Error(ErrorCode::ShapeMismatch, "pointwise affine needs in, out >= 1");
  check_size(weights, static_cast<std::size_t>(in) * out, "pointwise weights");
  check_size(bias, static_cast<std::size_t>(out), "pointwise bias");
}

void PointwiseAffine::apply(std::span<const double> x, std::span<double> y) const {
  for (int o = 0; o < out; ++o) {
    double acc = bias[o];
    for (int i = 0; i < in; ++i) acc += weights[static_cast<std::size_t>(o) * in + i] * x[i];
    y[o] = acc;
  }
}

FeatureVolume apply_pointwise(const FeatureVolume& x, const PointwiseAffine& affine) {
  affine.validate();
  if (affine.in != x.channels) throw Error(ErrorCode::ShapeMismatch, "affine input width mismatch");
  FeatureVolume out(x.grid, affine.out);
  out.valid = x.valid;
  parallel_for(x.voxel_count(), [&](std::size_t v) {
    if (x.valid[v]) affine.apply(x.at(v), out.at(v));
  });
  return out;
}

FeatureVolume inject_polar(const FeatureVolume& v_po, const CrossIndexTable& table,
                           const FeatureVolume& v_ca, const PointwiseAffine& align) {
  if (table.indices.size() != v_ca.voxel_count() || table.polar_count != v_po.voxel_count()) {
    throw Error(ErrorCode::LevelMismatch,
                "level-" + std::to_string(table.level) + " table covers " +
                    std::to_string(table.indices.size()) + " -> " +
                    std::to_string(table.polar_count) + " voxels, volumes have " +
                    std::to_string(v_ca.voxel_count()) + " -> " +
                    std::to_string(v_po.voxel_count()));
  }
  align.validate();
  if (align.in != v_po.channels || align.out != v_ca.channels) {
    throw Error(ErrorCode::ShapeMismatch, "align must map polar channels to cartesian channels");
  }
  for (std::uint32_t idx : table.indices) {
    if (idx >= table.polar_count) {
      throw Error(ErrorCode::IndexOutOfRange, "cross index " + std::to_string(idx) + " >= " +
                                                  std::to_string(table.polar_count));
    }
  }
  const int c_ca = v_ca.channels;
  FeatureVolume out(v_ca.grid, 2 * c_ca);
  parallel_for(v_ca.voxel_count(), [&](std::size_t v) {
    const std::size_t src = table.indices[v];
    const bool ok = v_ca.valid[v] || v_po.valid[src];
    out.valid[v] = ok ? 1 : 0;
    if (!ok) return;
    auto dst = out.at(v);
    align.apply(v_po.at(src), dst.first(static_cast<std::size_t>(c_ca)));
    const auto ca = v_ca.at(v);
    std::copy(ca.begin(), ca.end(), dst.begin() + c_ca);
  });
  return out;
}

SaliencyParams SaliencyParams::zeros(int channels, int rho) {
  SaliencyParams p;
  p.channels = channels;
  p.hidden = std::max(1, (channels + rho - 1) / rho);
  p.mlp_w1.assign(static_cast<std::size_t>(p.hidden) * channels, 0.0);
  p.mlp_b1.assign(static_cast<std::size_t>(p.hidden), 0.0);
  p.mlp_w2.assign(static_cast<std::size_t>(channels) * p.hidden, 0.0);
  p.mlp_b2.assign(static_cast<std::size_t>(channels), 0.0);
  p.spatial_kernel.assign(2 * kSpatialKernel * kSpatialKernel * kSpatialKernel, 0.0);
  return p;
}

void SaliencyParams::validate() const {
  if (channels < 1 || hidden < 1) throw Error(ErrorCode::ShapeMismatch, "saliency needs channels, hidden >= 1");
  const auto c = static_cast<std::size_t>(channels);
  const auto h = static_cast<std::size_t>(hidden);
  check_size(mlp_w1, h * c, "mlp_w1");
  check_size(mlp_b1, h, "mlp_b1");
  check_size(mlp_w2, c * h, "mlp_w2");
  check_size(mlp_b2, c, "mlp_b2");
  check_size(spatial_kernel, 2 * kSpatialKernel * kSpatialKernel * kSpatialKernel, "spatial_kernel");
}

MoeParams MoeParams::zeros(int channels, int experts, int gate_kernel) {
  MoeParams p;
  p.channels = channels;
  p.gate_kernel = gate_kernel;
  p.experts.assign(static_cast<std::size_t>(experts),
                   Expert{PointwiseAffine::zeros(channels, channels),
                          PointwiseAffine::zeros(channels, channels)});
  p.gate_weights.assign(static_cast<std::size_t>(experts) * gate_kernel * gate_kernel * gate_kernel, 0.0);
  p.gate_bias.assign(static_cast<std::size_t>(experts), 0.0);
  return p;
}

void MoeParams::validate() const {
  if (experts.empty()) throw Error(ErrorCode::ShapeMismatch, "need at least one expert");
  if (gate_kernel < 1 || gate_kernel % 2 == 0) {
    throw Error(ErrorCode::ShapeMismatch, "gating kernel size must be odd");
  }
  for (const auto& e : experts) {
    e.first.validate();
    e.second.validate();
    if (e.first.in != channels || e.first.out != channels || e.second.in != channels ||
        e.second.out != channels) {
      throw Error(ErrorCode::ShapeMismatch, "experts must preserve the channel count");
    }
  }
  const std::size_t taps = static_cast<std::size_t>(gate_kernel) * gate_kernel * gate_kernel;
  check_size(gate_weights, experts.size() * taps, "gate_weights");
  check_size(gate_bias, experts.size(), "gate_bias");
}

std::vector<double> channel_gate(const FeatureVolume& x, const SaliencyParams& params) {
  params.validate();
  if (params.channels != x.channels) throw Error(ErrorCode::ShapeMismatch, "saliency channel mismatch");
  const std::size_t n = x.voxel_count();
  const auto channels = static_cast<std::size_t>(x.channels);
  std::vector<double> avg(channels), peak(channels);
  std::vector<double> column(n);
  for (std::size_t c = 0; c < channels; ++c) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < n; ++v) {
      column[v] = x.data[v * channels + c];
      m = std::max(m, column[v]);
    }
    avg[c] = pairwise_sum(column) / static_cast<double>(n);
    peak[c] = m;
  }
  const auto a = channel_mlp(params, avg);
  const auto b = channel_mlp(params, peak);
  std::vector<double> gate(channels);
  for (std::size_t c = 0; c < channels; ++c) gate[c] = sigmoid(a[c] + b[c]);
  return gate;
}

std::vector<double> spatial_gate(const FeatureVolume& x, const SaliencyParams& params) {
  params.validate();
  if (params.channels != x.channels) throw Error(ErrorCode::ShapeMismatch, "saliency channel mismatch");
  const std::size_t n = x.voxel_count();
  std::vector<std::vector<double>> maps(2, std::vector<double>(n));
  for (std::size_t v = 0; v < n; ++v) {
    const auto f = x.at(v);
    double sum = 0.0;
    double m = -std::numeric_limits<double>::infinity();
    for (double value : f) {
      sum += value;
      m = std::max(m, value);
    }
    maps[0][v] = sum / static_cast<double>(x.channels);
    maps[1][v] = m;
  }
  auto logits = conv3d(maps, x.dims(), params.spatial_kernel, params.spatial_bias,
                       SaliencyParams::kSpatialKernel);
  for (double& g : logits) g = sigmoid(g);
  return logits;
}

FeatureVolume apply_saliency(const FeatureVolume& x, std::span<const double> channel_gate,
                             std::span<const double> spatial_gate) {
  if (channel_gate.size() != static_cast<std::size_t>(x.channels) ||
      spatial_gate.size() != x.voxel_count()) {
    throw Error(ErrorCode::ShapeMismatch, "gate shapes do not broadcast against the volume");
  }
  FeatureVolume out = x;
  parallel_for(x.voxel_count(), [&](std::size_t v) {
    auto f = out.at(v);
    for (std::size_t c = 0; c < f.size(); ++c) f[c] = f[c] * channel_gate[c] * spatial_gate[v];
  });
  return out;
}

std::vector<double> grad_energy3d(const FeatureVolume& y) {
  const GridDims d = y.dims();
  const auto channels = static_cast<std::size_t>(y.channels);
  const std::size_t strides[3] = {1, d.nx, d.nx * d.ny};
  std::vector<double> energy(d.count());
  parallel_for(d.count(), [&](std::size_t v) {
    const std::size_t coord[3] = {v % d.nx, (v / d.nx) % d.ny, v / (d.nx * d.ny)};
    const std::size_t extent[3] = {d.nx, d.ny, d.nz};
    double e = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      if (coord[axis] + 1 >= extent[axis]) continue;
      const std::size_t w = v + strides[axis];
      for (std::size_t c = 0; c < channels; ++c) {
        const double diff = y.data[w * channels + c] - y.data[v * channels + c];
        e += diff * diff;
      }
    }
    energy[v] = e;
  });
  return energy;
}

std::vector<double> grad_energy3d_gradient(const FeatureVolume& y) {
  const GridDims d = y.dims();
  const auto channels = static_cast<std::size_t>(y.channels);
  const std::size_t strides[3] = {1, d.nx, d.nx * d.ny};
  std::vector<double> grad(y.data.size());
  parallel_for(d.count(), [&](std::size_t v) {
    const std::size_t coord[3] = {v % d.nx, (v / d.nx) % d.ny, v / (d.nx * d.ny)};
    const std::size_t extent[3] = {d.nx, d.ny, d.nz};
    for (std::size_t c = 0; c < channels; ++c) {
      const double here = y.data[v * channels + c];
      double g = 0.0;
      for (int axis = 0; axis < 3; ++axis) {
        if (coord[axis] + 1 < extent[axis]) {
          g -= 2.0 * (y.data[(v + strides[axis]) * channels + c] - here);
        }
        if (coord[axis] > 0) g += 2.0 * (here - y.data[(v - strides[axis]) * channels + c]);
      }
      grad[v * channels + c] = g;
    }
  });
  return grad;
}

std::vector<double> moe_gates(const FeatureVolume& y, const MoeParams& params) {
  params.validate();
  if (params.channels != y.channels) throw Error(ErrorCode::ShapeMismatch, "MoE channel mismatch");
  const std::size_t experts = params.num_experts();
  const std::size_t taps =
      static_cast<std::size_t>(params.gate_kernel) * params.gate_kernel * params.gate_kernel;
  const std::vector<std::vector<double>> energy{grad_energy3d(y)};
  std::vector<std::vector<double>> logits(experts);
  for (std::size_t k = 0; k < experts; ++k) {
    logits[k] = conv3d(energy, y.dims(),
                       std::span<const double>(params.gate_weights).subspan(k * taps, taps),
                       params.gate_bias[k], params.gate_kernel);
  }
  std::vector<double> alpha(y.voxel_count() * experts);
  parallel_for(y.voxel_count(), [&](std::size_t v) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < experts; ++k) peak = std::max(peak, logits[k][v]);
    double* a = alpha.data() + v * experts;
    for (std::size_t k = 0; k < experts; ++k) a[k] = std::exp(logits[k][v] - peak);
    const double total = order_invariant_sum(std::span<const double>(a, experts));
    for (std::size_t k = 0; k < experts; ++k) a[k] /= total;
  });
  return alpha;
}

FeatureVolume moe_fuse(const FeatureVolume& y, const MoeParams& params) {
  const std::vector<double> alpha = moe_gates(y, params);
  const std::size_t experts = params.num_experts();
  const auto channels = static_cast<std::size_t>(y.channels);
  FeatureVolume out = y;
  parallel_for(y.voxel_count(), [&](std::size_t v) {
    if (!y.valid[v]) return;
    const auto in = y.at(v);
    std::vector<double> hidden(channels), expert_out(experts * channels), terms(experts);
    for (std::size_t k = 0; k < experts; ++k) {
      const Expert& e = params.experts[k];
      e.first.apply(in, hidden);
      for (double& h : hidden) h = gelu(h);
      e.second.apply(hidden, std::span<double>(expert_out.data() + k * channels, channels));
    }
    auto dst = out.at(v);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t k = 0; k < experts; ++k) {
        terms[k] = alpha[v * experts + k] * expert_out[k * channels + c];
      }
      dst[c] = in[c] + order_invariant_sum(terms);
    }
  });
  return out;
}

FeatureVolume amoe3d_forward(const FeatureVolume& x, const SaliencyParams& saliency,
                             const MoeParams& moe) {
  const auto a_c = channel_gate(x, saliency);
  const auto a_s = spatial_gate(x, saliency);
  return moe_fuse(apply_saliency(x, a_c, a_s), moe);
}

void HierarchicalAmoe3d::set_level(int level, AmoeLevelParams params) {
  if (!is_supported_level(level)) {
    throw Error(ErrorCode::InvalidArgument, "level must be 1, 2 or 4");
  }
  params.saliency.validate();
  params.moe.validate();
  if (params.reduce) params.reduce->validate();
  levels_.insert_or_assign(level, std::move(params));
}

const AmoeLevelParams& HierarchicalAmoe3d::level(int level) const {
  const auto it = levels_.find(level);
  if (it == levels_.end()) {
    throw Error(ErrorCode::LevelMismatch, "no parameters for level " + std::to_string(level));
  }
  return it->second;
}

FeatureVolume HierarchicalAmoe3d::forward(int level, const FeatureVolume& injected) const {
  const AmoeLevelParams& p = this->level(level);
  FeatureVolume fused = amoe3d_forward(injected, p.saliency, p.moe);
  if (p.reduce) return apply_pointwise(fused, *p.reduce);
  return fused;
}

}  // namespace panocc
