#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "panocc/bigrid.hpp"
#include "panocc/volume.hpp"

namespace panocc {

/// 1x1x1 convolution: out = W in + b with W stored out x in, row-major.
struct PointwiseAffine {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  static PointwiseAffine identity(int channels);
  static PointwiseAffine zeros(int in, int out);
  void apply(std::span<const double> x, std::span<double> y) const;
  void validate() const;
};

/// Applies `affine` to every valid voxel; invalid voxels stay zero.
FeatureVolume apply_pointwise(const FeatureVolume& x, const PointwiseAffine& affine);

/// Gathers polar features through the cross-grid table, aligns them with a
/// pointwise affine and concatenates [aligned polar | cartesian] along
/// channels. A voxel is valid when either source is; invalid voxels are zero.
/// Throws LevelMismatch when the table does not describe these two volumes,
/// IndexOutOfRange on a corrupt table and ShapeMismatch on channel mismatch.
FeatureVolume inject_polar(const FeatureVolume& v_po, const CrossIndexTable& table,
                           const FeatureVolume& v_ca, const PointwiseAffine& align);

/// Dual-path saliency parameters. The channel MLP (C -> hidden -> C with a
/// ReLU in between) is shared by the average- and max-pooled descriptors.
/// The spatial kernel is 2 x 7 x 7 x 7, layout [in][dz][dy][dx], input 0 the
/// channel mean map and input 1 the channel max map.
struct SaliencyParams {
  static constexpr int kSpatialKernel = 7;

  int channels = 0;
  int hidden = 0;
  std::vector<double> mlp_w1;  // hidden x channels
  std::vector<double> mlp_b1;  // hidden
  std::vector<double> mlp_w2;  // channels x hidden
  std::vector<double> mlp_b2;  // channels
  std::vector<double> spatial_kernel;
  double spatial_bias = 0.0;

  /// All-zero parameters with hidden = ceil(channels / rho).
  static SaliencyParams zeros(int channels, int rho = 16);
  void validate() const;
};

/// One Conv-GELU-Conv pointwise expert, C -> C -> C.
struct Expert {
  PointwiseAffine first;
  PointwiseAffine second;
};

/// K experts and a k_g^3 gating convolution mapping the 1-channel gradient
/// energy map to K logits; gate_weights is K x k_g^3, layout [k][dz][dy][dx].
struct MoeParams {
  int channels = 0;
  int gate_kernel = 3;
  std::vector<Expert> experts;
  std::vector<double> gate_weights;
  std::vector<double> gate_bias;

  std::size_t num_experts() const { return experts.size(); }
  static MoeParams zeros(int channels, int experts = 4, int gate_kernel = 3);
  void validate() const;
};

/// sigma(MLP(GAP(x)) + MLP(GMP(x))) per channel, pooling over all voxels.
std::vector<double> channel_gate(const FeatureVolume& x, const SaliencyParams& params);

/// sigma(conv7([mean_c x; max_c x])) per voxel, zero padding 3.
std::vector<double> spatial_gate(const FeatureVolume& x, const SaliencyParams& params);

/// y = x * a_c[channel] * a_s[voxel]. Throws ShapeMismatch.
FeatureVolume apply_saliency(const FeatureVolume& x, std::span<const double> channel_gate,
                             std::span<const double> spatial_gate);

/// Per-voxel sum over channels and axes of squared forward differences; the
/// difference at the last slice of an axis is zero.
std::vector<double> grad_energy3d(const FeatureVolume& y);

/// Gradient of sum_v grad_energy3d(y)[v] with respect to every entry of y,
/// laid out like y.data.
std::vector<double> grad_energy3d_gradient(const FeatureVolume& y);

/// Gating weights alpha (voxels x K): softmax over experts of the gating
/// convolution applied to grad_energy3d(y).
std::vector<double> moe_gates(const FeatureVolume& y, const MoeParams& params);

/// y + sum_k alpha_k E_k(y), alpha broadcast over channels. Sums over experts
/// are evaluated in an order-independent way, so permuting experts together
/// with their gating rows gives bit-identical output. Invalid voxels stay zero.
FeatureVolume moe_fuse(const FeatureVolume& y, const MoeParams& params);

/// Saliency gates followed by the expert fuse.
FeatureVolume amoe3d_forward(const FeatureVolume& x, const SaliencyParams& saliency,
                             const MoeParams& moe);

/// Parameters of one decoder level. `reduce` optionally maps the injected
/// 2C channels back to C after the fuse.
struct AmoeLevelParams {
  SaliencyParams saliency;
  MoeParams moe;
  std::optional<PointwiseAffine> reduce;
};

/// The same block instantiated per stride level (1, 2, 4), each level with
/// its own parameters.
class HierarchicalAmoe3d {
 public:
  void set_level(int level, AmoeLevelParams params);
  bool has_level(int level) const { return levels_.contains(level); }
  const AmoeLevelParams& level(int level) const;
  FeatureVolume forward(int level, const FeatureVolume& injected) const;

 private:
  std::map<int, AmoeLevelParams> levels_;
};

}  // namespace panocc
