#pragma once

#include <array>
#include <vector>

#include "iaf/forward/weights.hpp"
#include "iaf/neighbors.hpp"

namespace iaf::net {

// Per-neighbor concatenation for point i: (p_k - p_i) | p_i | x_k | x~_k,
// where p rows are the point properties, x the Euclidean neighbors' features
// and x~ the eigenvalue-space neighbors' features. K rows wide.
RowMatXf gbaa_concat(const RowMatXd& props, const RowMatXf& feats,
                     const NeighborList& euclid_nbrs, const NeighborList& eigen_nbrs, int i);

// Concatenation pushed through the shared two-stage map. K x D_l.
RowMatXf gbaa_aggregate(const RowMatXd& props, const RowMatXf& feats,
                        const NeighborList& euclid_nbrs, const NeighborList& eigen_nbrs,
                        const Affine& g1_a, const Affine& g1_b, int i);

// Learned per-channel scores, softmax-normalized over the K rows; output is
// the score-weighted sum, a convex combination per channel.
Eigen::RowVectorXf attentive_pool(const Eigen::Ref<const RowMatXf>& local,
                                  const Affine& score);

RowMatXf multi_scale_combine(const RowMatXf& a, const RowMatXf& b);

// Aggregate + pool for every point; the fused form used by the pipeline.
RowMatXf gbaa_block(const RowMatXd& props, const RowMatXf& feats,
                    const NeighborList& euclid_nbrs, const NeighborList& eigen_nbrs,
                    const EncoderWeights& weights);

// Inverse-square-distance interpolation from up to 3 coarse neighbors, with
// an exact-hit guard: a fine point coinciding with a coarse point copies its
// row. Weights are computed in double precision.
RowMatXf interpolate_features(const Eigen::Ref<const RowMatXf>& coarse_feats,
                              const RowMat3d& coarse_pos, const RowMat3d& fine_pos);
RowMatXd interpolate_rows(const Eigen::Ref<const RowMatXd>& coarse_rows,
                          const RowMat3d& coarse_pos, const RowMat3d& fine_pos);

// Interpolation followed by skip concatenation and the g_psi map.
RowMatXf feature_propagate(const RowMatXf& coarse_feats, const RowMat3d& coarse_pos,
                           const RowMat3d& fine_pos, const RowMatXf& skip_feats,
                           const Affine& g_psi);

// Focal features of the selected points: g1(y_fp | z_up) per selected row.
RowMatXf focalize_features(const RowMatXf& y_fp, const RowMatXd& z_up,
                           const std::vector<int>& selected, const Affine& g1_focal);

// Attention-mode affinities: softmax over the focal set of <g4(y_i), g3(x_j)>.
RowMatXd nonlocal_affinities(const RowMatXf& y_fp, const RowMatXf& focal,
                             const DecoderWeights& weights);

// Updates every decoder row against the focal set. literal mode sums the
// elementwise products of the printed form; attention mode is a standard
// softmax-affinity nonlocal block. Row count and width are preserved.
RowMatXf nonlocal_update(const RowMatXf& y_fp, const RowMatXf& focal,
                         const DecoderWeights& weights, NonlocalMode mode,
                         bool residual = true);

// Numerically stable row softmax; rows sum to 1 for logits up to +-1e4.
RowMatXd predict_probs(const Eigen::Ref<const RowMatXd>& logits);

// Mean cross-entropy with the probability clamped at 1e-12.
double multi_stage_loss(const RowMatXd& probs, const Eigen::VectorXi& labels);

double final_loss(const std::array<double, 5>& stage_losses, double prediction_loss);

}  // namespace iaf::net
