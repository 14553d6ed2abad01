#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "iaf/forward/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace iaf;
using namespace iaf::net;

namespace {

Affine zero_affine(int in, int out) {
    Affine a;
    a.w = RowMatXf::Zero(in, out);
    a.b = Eigen::RowVectorXf::Zero(out);
    return a;
}

struct GbaaSetup {
    PointCloud cloud;
    RowMatXf feats;
    NeighborList euclid;
    NeighborList eigen_nbrs;
};

GbaaSetup gbaa_setup(int n, int k, int d, std::uint64_t seed) {
    const RowMat3d pts = fixtures::random_positions(n, seed);
    PointCloud cloud(pts);
    const KdTree3 tree = KdTree3::build(pts);
    NeighborList euclid = knn(tree, k, true);
    // Any 3-d embedding works as the second space; reuse scaled positions.
    NeighborList eig = knn(KdTree3::build(RowMat3d(pts * 0.5)), k, true);
    eig.space_tag = SpaceTag::eigenvalue;
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    RowMatXf feats(n, d);
    for (Eigen::Index i = 0; i < feats.size(); ++i) feats.data()[i] = normal(rng);
    return GbaaSetup{std::move(cloud), std::move(feats), std::move(euclid), std::move(eig)};
}

double reference_cross_entropy(const RowMatXd& probs, const Eigen::VectorXi& labels) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        total += -std::log(std::max(probs(i, labels(i)), 1e-12));
    }
    return total / static_cast<double>(probs.rows());
}

}  // namespace

TEST_CASE("gbaa concatenation starts with a zero offset block for the self row") {
    GbaaSetup s = gbaa_setup(20, 1, 4, 3);  // k = 1: the self row only
    const RowMatXf concat = gbaa_concat(s.cloud.positions(), s.feats, s.euclid, s.eigen_nbrs, 5);
    REQUIRE(concat.rows() == 1);
    REQUIRE(concat.cols() == 2 * 3 + 2 * 4);
    for (int c = 0; c < 3; ++c) CHECK(concat(0, c) == 0.0f);  // p_i - p_i
    for (int c = 3; c < 6; ++c) {
        CHECK(concat(0, c) == static_cast<float>(s.cloud.positions()(5, c - 3)));
    }
    for (int c = 0; c < 4; ++c) CHECK(concat(0, 6 + c) == s.feats(5, c));
}

TEST_CASE("gbaa aggregate has shape K x D and zero weights give zero rows") {
    GbaaSetup s = gbaa_setup(64, 8, 4, 4);
    const Affine g1a = zero_affine(2 * 3 + 2 * 4, 16);
    const Affine g1b = zero_affine(16, 16);
    const RowMatXf local =
        gbaa_aggregate(s.cloud.positions(), s.feats, s.euclid, s.eigen_nbrs, g1a, g1b, 0);
    REQUIRE(local.rows() == 8);
    REQUIRE(local.cols() == 16);
    CHECK(local.cwiseAbs().maxCoeff() == 0.0f);  // zero affine stages stay zero

    // Mismatched shapes are configuration errors.
    CHECK_THROWS_AS(
        gbaa_aggregate(s.cloud.positions(), s.feats, s.euclid, s.eigen_nbrs,
                       zero_affine(10, 16), g1b, 0),
        ConfigError);
}

TEST_CASE("attentive pooling is an exact convex combination") {
    // All rows identical: output equals that row regardless of scores.
    RowMatXf local(3, 5);
    for (int j = 0; j < 3; ++j) local.row(j) << 1.0f, -2.0f, 0.5f, 3.0f, 0.0f;
    std::mt19937_64 rng(11);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    Affine score;
    score.w.resize(5, 5);
    for (Eigen::Index i = 0; i < score.w.size(); ++i) score.w.data()[i] = normal(rng);
    score.b = Eigen::RowVectorXf::Zero(5);
    const Eigen::RowVectorXf pooled = attentive_pool(local, score);
    for (int c = 0; c < 5; ++c) CHECK(pooled(c) == doctest::Approx(local(0, c)).epsilon(1e-6));

    // Zero scoring map: plain average.
    RowMatXf two(2, 1);
    two << 0.0f, 4.0f;
    const Eigen::RowVectorXf avg = attentive_pool(two, zero_affine(1, 1));
    CHECK(avg(0) == doctest::Approx(2.0f).epsilon(1e-6));

    // Hand-computed softmax: scores {0, ln 3} weight the rows 1/4 and 3/4.
    RowMatXf pair(2, 1);
    pair << 0.0f, 1.0f;
    Affine ln3;
    ln3.w.resize(1, 1);
    ln3.w(0, 0) = std::log(3.0f);
    ln3.b = Eigen::RowVectorXf::Zero(1);
    const Eigen::RowVectorXf weighted = attentive_pool(pair, ln3);
    CHECK(weighted(0) == doctest::Approx(0.75f).epsilon(1e-6));
}

TEST_CASE("attentive pooling stays within the per-channel input range") {
    std::mt19937_64 rng(12);
    std::normal_distribution<float> normal(0.0f, 2.0f);
    for (int trial = 0; trial < 50; ++trial) {
        RowMatXf local(16, 8);
        Affine score;
        score.w.resize(8, 8);
        score.b.resize(8);
        for (Eigen::Index i = 0; i < local.size(); ++i) local.data()[i] = normal(rng);
        for (Eigen::Index i = 0; i < score.w.size(); ++i) score.w.data()[i] = normal(rng);
        for (Eigen::Index i = 0; i < score.b.size(); ++i) score.b.data()[i] = normal(rng);
        const Eigen::RowVectorXf pooled = attentive_pool(local, score);
        for (int c = 0; c < 8; ++c) {
            CHECK(pooled(c) >= local.col(c).minCoeff() - 1e-6f);
            CHECK(pooled(c) <= local.col(c).maxCoeff() + 1e-6f);
        }
    }
}

TEST_CASE("multi_scale_combine adds elementwise") {
    RowMatXf a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 10, 20, 30, 40;
    const RowMatXf sum = multi_scale_combine(a, b);
    CHECK(sum(0, 0) == 11.0f);
    CHECK(sum(1, 1) == 44.0f);
    CHECK(multi_scale_combine(a, b) == multi_scale_combine(b, a));
    CHECK(multi_scale_combine(a, RowMatXf::Zero(2, 2)) == a);
    CHECK_THROWS_AS(multi_scale_combine(a, RowMatXf::Zero(3, 2)), ConfigError);
}

TEST_CASE("interpolation guards exact hits and falls back below three neighbors") {
    RowMat3d coarse(2, 3);
    coarse << 0, 0, 0, 1, 0, 0;
    RowMatXf cf(2, 1);
    cf << 0.0f, 1.0f;

    RowMat3d fine(3, 3);
    fine << 0, 0, 0,      // exact hit on coarse point 0
        0.5, 0, 0,        // midpoint
        0.25, 0, 0;
    const RowMatXf out = interpolate_features(cf, coarse, fine);
    CHECK(out(0, 0) == 0.0f);  // copied bit-for-bit
    CHECK(out(1, 0) == doctest::Approx(0.5f).epsilon(1e-6));
    // Inverse-square weights: (1/d1^2, 1/d2^2) = (16, 16/9) -> 1/10.
    CHECK(out(2, 0) == doctest::Approx(0.1f).epsilon(1e-5));

    // Uniform coarse features interpolate to the same constant.
    RowMatXf constant(2, 3);
    constant.setConstant(7.5f);
    const RowMatXf flat = interpolate_features(constant, coarse, fine);
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
        CHECK(flat.data()[i] == doctest::Approx(7.5f).epsilon(1e-6));
    }
}

TEST_CASE("feature_propagate concatenates skip features and maps width") {
    const RowMat3d coarse_pos = fixtures::random_positions(10, 21);
    const RowMat3d fine_pos = fixtures::random_positions(40, 22);
    RowMatXf coarse(10, 6);
    coarse.setRandom();
    RowMatXf skip(40, 4);
    skip.setRandom();
    const Affine g_psi = zero_affine(10, 12);
    const RowMatXf out = feature_propagate(coarse, coarse_pos, fine_pos, skip, g_psi);
    CHECK(out.rows() == 40);
    CHECK(out.cols() == 12);
    CHECK(out.cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("focalize_features shapes and zero-weight behavior") {
    RowMatXf y_fp(12, 6);
    y_fp.setRandom();
    RowMatXd z_up = RowMatXd::Constant(12, 3, 1.0 / 3.0);
    const Affine g1 = zero_affine(9, 5);

    const RowMatXf empty = focalize_features(y_fp, z_up, {}, g1);
    CHECK(empty.rows() == 0);
    CHECK(empty.cols() == 5);

    const std::vector<int> selected{0, 3, 11};
    const RowMatXf focal = focalize_features(y_fp, z_up, selected, g1);
    CHECK(focal.rows() == 3);
    CHECK(focal.cols() == 5);
    CHECK(focal.cwiseAbs().maxCoeff() == 0.0f);  // zero map keeps rows zero

    CHECK_THROWS_AS(focalize_features(y_fp, z_up, {12}, g1), ParameterError);
}

TEST_CASE("nonlocal attention affinities are a softmax over the focal set") {
    std::mt19937_64 rng(31);
    std::normal_distribution<float> normal(0.0f, 0.5f);
    const int n = 20, m = 7, d = 8, dc = 6;
    RowMatXf y_fp(n, d), focal(m, dc);
    for (Eigen::Index i = 0; i < y_fp.size(); ++i) y_fp.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < focal.size(); ++i) focal.data()[i] = normal(rng);

    DecoderWeights w;
    auto fill = [&](Affine& a, int in, int out) {
        a.w.resize(in, out);
        a.b.resize(out);
        for (Eigen::Index i = 0; i < a.w.size(); ++i) a.w.data()[i] = normal(rng);
        for (Eigen::Index i = 0; i < a.b.size(); ++i) a.b.data()[i] = normal(rng);
    };
    fill(w.g2_out, d, d);
    fill(w.g3_key, dc, d);
    fill(w.g4_query, d, d);
    fill(w.g5_value, dc, d);

    const RowMatXd aff = nonlocal_affinities(y_fp, focal, w);
    REQUIRE(aff.rows() == n);
    REQUIRE(aff.cols() == m);
    for (int i = 0; i < n; ++i) {
        CHECK(aff.row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
        for (int j = 0; j < m; ++j) CHECK(aff(i, j) >= 0.0);
    }

    // Singleton focal set: the affinity is exactly one and the update
    // depends on that single focal point.
    const RowMatXf one_focal = focal.topRows(1);
    const RowMatXd single = nonlocal_affinities(y_fp, one_focal, w);
    for (int i = 0; i < n; ++i) CHECK(single(i, 0) == 1.0);

    const RowMatXf updated = nonlocal_update(y_fp, one_focal, w, NonlocalMode::attention, true);
    const RowMatXf expected =
        w.g2_out.apply(w.g5_value.apply(one_focal).replicate(n, 1)) + y_fp;
    CHECK((updated - expected).cwiseAbs().maxCoeff() <= 1e-5f);
}

TEST_CASE("literal nonlocal with zero focal features reduces to the residual") {
    std::mt19937_64 rng(32);
    std::normal_distribution<float> normal(0.0f, 0.5f);
    const int n = 10, m = 4, d = 6, dc = 5;
    RowMatXf y_fp(n, d);
    for (Eigen::Index i = 0; i < y_fp.size(); ++i) y_fp.data()[i] = normal(rng);
    const RowMatXf focal = RowMatXf::Zero(m, dc);

    DecoderWeights w;
    w.g2_out = zero_affine(d, d);
    w.g3_key = zero_affine(dc, d);
    w.g4_query = zero_affine(d, d);
    w.g5_value = zero_affine(d, d);
    // Zero focal rows through zero-bias maps kill the update term entirely.
    w.g2_out.w.setRandom();
    w.g4_query.w.setRandom();
    w.g5_value.w.setRandom();
    w.g3_key.w.setRandom();

    const RowMatXf with_residual = nonlocal_update(y_fp, focal, w, NonlocalMode::literal, true);
    CHECK((with_residual - y_fp).cwiseAbs().maxCoeff() == 0.0f);

    const RowMatXf bare = nonlocal_update(y_fp, focal, w, NonlocalMode::literal, false);
    CHECK(bare.cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("nonlocal mode parsing rejects unknown names") {
    CHECK(parse_nonlocal_mode("literal") == NonlocalMode::literal);
    CHECK(parse_nonlocal_mode("attention") == NonlocalMode::attention);
    CHECK_THROWS_AS(parse_nonlocal_mode("bogus"), ParameterError);
}

TEST_CASE("predict_probs is a stable softmax") {
    RowMatXd uniform_logits = RowMatXd::Constant(2, 13, 4.2);
    const RowMatXd uniform = predict_probs(uniform_logits);
    for (int c = 0; c < 13; ++c) {
        CHECK(uniform(0, c) == doctest::Approx(1.0 / 13.0).epsilon(1e-12));
    }

    RowMatXd extreme(1, 2);
    extreme << 1000.0, 0.0;
    const RowMatXd hard = predict_probs(extreme);
    CHECK(std::abs(hard(0, 0) - 1.0) <= 1e-9);
    CHECK(hard(0, 1) <= 1e-9);
    CHECK(hard.allFinite());

    RowMatXd huge(1, 2);
    huge << 1e4, -1e4;
    CHECK(predict_probs(huge).allFinite());

    RowMatXd hand(1, 2);
    hand << std::log(1.0), std::log(3.0);
    const RowMatXd quarters = predict_probs(hand);
    CHECK(quarters(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(quarters(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("multi_stage_loss analytic values") {
    // Perfect one-hot predictions.
    RowMatXd onehot = RowMatXd::Zero(5, 3);
    Eigen::VectorXi labels(5);
    labels << 0, 2, 1, 1, 0;
    for (int i = 0; i < 5; ++i) onehot(i, labels(i)) = 1.0;
    CHECK(multi_stage_loss(onehot, labels) <= 1e-11);

    // Uniform over 13 classes: exactly ln 13.
    RowMatXd uniform = RowMatXd::Constant(7, 13, 1.0 / 13.0);
    Eigen::VectorXi any = Eigen::VectorXi::Zero(7);
    CHECK(std::abs(multi_stage_loss(uniform, any) - std::log(13.0)) <= 1e-9);

    // Single point with probability one half on the true class.
    RowMatXd half(1, 2);
    half << 0.5, 0.5;
    Eigen::VectorXi one(1);
    one << 1;
    CHECK(std::abs(multi_stage_loss(half, one) - std::log(2.0)) <= 1e-12);

    Eigen::VectorXi bad(7);
    bad.setConstant(13);
    CHECK_THROWS_AS(multi_stage_loss(uniform, bad), ValidationError);
}

TEST_CASE("multi_stage_loss matches an independent oracle on random input") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> uniform(0.01, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        RowMatXd probs(50, 6);
        for (int i = 0; i < 50; ++i) {
            double sum = 0.0;
            for (int c = 0; c < 6; ++c) {
                probs(i, c) = uniform(rng);
                sum += probs(i, c);
            }
            probs.row(i) /= sum;
        }
        Eigen::VectorXi labels(50);
        for (int i = 0; i < 50; ++i) labels(i) = static_cast<int>(rng() % 6);
        CHECK(std::abs(multi_stage_loss(probs, labels) -
                       reference_cross_entropy(probs, labels)) <= 1e-9);
    }
}

TEST_CASE("final_loss sums the stages") {
    CHECK(final_loss({0, 0, 0, 0, 0}, 0.0) == 0.0);
    CHECK(final_loss({1, 1, 1, 1, 1}, 1.0) == 6.0);
    CHECK(final_loss({0.5, 0.25, 0.125, 0.0625, 0.03125}, 2.0) ==
          doctest::Approx(2.96875).epsilon(1e-15));
}

TEST_CASE("layer specs follow the quarter reduction") {
    const std::vector<LayerSpec> specs = make_layer_specs(1024);
    REQUIRE(specs.size() == 5);
    const int expected_n[] = {1024, 256, 64, 16, 4};
    const int expected_d[] = {64, 128, 256, 512, 1024};
    for (int l = 0; l < 5; ++l) {
        CHECK(specs[static_cast<size_t>(l)].n_points == expected_n[l]);
        CHECK(specs[static_cast<size_t>(l)].feat_width == expected_d[l]);
    }

    try {
        make_layer_specs(255);  // floor(255/256) = 0 at the deepest level
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("layer 5") != std::string::npos);
    }
}

TEST_CASE("weight bundles regenerate bit-identically from the seed") {
    const std::vector<LayerSpec> specs = make_layer_specs(512);
    const WeightBundle a = make_weights(specs, 13, 3, 1234, NonlocalMode::attention);
    const WeightBundle b = make_weights(specs, 13, 3, 1234, NonlocalMode::attention);
    CHECK(a.enc[2].g1_a.w == b.enc[2].g1_a.w);
    CHECK(a.dec[1].g_psi.w == b.dec[1].g_psi.w);
    CHECK(a.head_fc3.b == b.head_fc3.b);

    const WeightBundle c = make_weights(specs, 13, 3, 1235, NonlocalMode::attention);
    CHECK(a.enc[0].g1_a.w != c.enc[0].g1_a.w);

    // Scale bound follows fan-in.
    const float bound = 1.0f / std::sqrt(static_cast<float>(a.enc[0].g1_a.in()));
    CHECK(a.enc[0].g1_a.w.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("forward pipeline shapes, determinism and probability rows") {
    const RowMat3d pts = fixtures::random_positions(1024, 91);
    Eigen::VectorXi gt(1024);
    std::mt19937_64 rng(92);
    for (int i = 0; i < 1024; ++i) gt(i) = static_cast<int>(rng() % 5);
    const PointCloud cloud(pts, std::nullopt, gt, 5);

    const std::vector<LayerSpec> specs = make_layer_specs(1024);
    PipelineConfig config;
    config.mining.k = 8;
    const PipelineResult a = forward_pipeline(cloud, specs, 7, config);
    const PipelineResult b = forward_pipeline(cloud, specs, 7, config);

    const int expected_n[] = {1024, 256, 64, 16, 4};
    for (int l = 0; l < 5; ++l) {
        CHECK(static_cast<int>(a.level_indices[static_cast<size_t>(l)].size()) == expected_n[l]);
        CHECK(a.features.x[static_cast<size_t>(l)].rows() == expected_n[l]);
        CHECK(a.features.x[static_cast<size_t>(l)].cols() ==
              specs[static_cast<size_t>(l)].feat_width);
        CHECK(a.features.y[static_cast<size_t>(l)].rows() == expected_n[l]);
        CHECK(a.features.z[static_cast<size_t>(l)].rows() == expected_n[l]);
        CHECK(a.features.z[static_cast<size_t>(l)].cols() == 5);

        // Bit-identical reruns at a fixed seed.
        CHECK(a.features.x[static_cast<size_t>(l)] == b.features.x[static_cast<size_t>(l)]);
        CHECK(a.features.y[static_cast<size_t>(l)] == b.features.y[static_cast<size_t>(l)]);
        CHECK(a.features.z[static_cast<size_t>(l)] == b.features.z[static_cast<size_t>(l)]);

        CHECK(a.features.x[static_cast<size_t>(l)].allFinite());
        CHECK(a.features.y[static_cast<size_t>(l)].allFinite());
        for (Eigen::Index r = 0; r < a.features.z[static_cast<size_t>(l)].rows(); ++r) {
            CHECK(std::abs(a.features.z[static_cast<size_t>(l)].row(r).sum() - 1.0) <= 1e-6);
        }
    }
    CHECK(a.final_probs == b.final_probs);
    CHECK(a.total_loss == b.total_loss);
    CHECK(a.has_losses);
    CHECK(a.total_loss > 0.0);
    CHECK(std::isfinite(a.total_loss));

    // A different seed actually changes the outcome.
    const PipelineResult c = forward_pipeline(cloud, specs, 8, config);
    CHECK(a.final_probs != c.final_probs);
}

TEST_CASE("forward pipeline literal mode and standardization stay finite") {
    const RowMat3d pts = fixtures::random_positions(320, 93);
    const PointCloud cloud(pts);
    const std::vector<LayerSpec> specs = make_layer_specs(320);
    PipelineConfig config;
    config.class_count = 4;
    config.mode = NonlocalMode::literal;
    config.mining.k = 6;
    const PipelineResult lit = forward_pipeline(cloud, specs, 3, config);
    CHECK(lit.final_probs.allFinite());
    CHECK(!lit.has_losses);  // no labels on this cloud

    config.standardize = true;
    const PipelineResult std_run = forward_pipeline(cloud, specs, 3, config);
    CHECK(std_run.final_probs.allFinite());
}

TEST_CASE("forward pipeline is permutation equivariant") {
    const int n = 300;
    const RowMat3d pts = fixtures::random_positions(n, 94);
    Eigen::VectorXi gt(n);
    std::mt19937_64 rng(95);
    for (int i = 0; i < n; ++i) gt(i) = static_cast<int>(rng() % 3);

    // Permutation fixing index 0, so the sampling seed tracks the same
    // physical point.
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    std::shuffle(perm.begin() + 1, perm.end(), rng);

    RowMat3d permuted(n, 3);
    Eigen::VectorXi pgt(n);
    for (int i = 0; i < n; ++i) {
        permuted.row(i) = pts.row(perm[static_cast<size_t>(i)]);
        pgt(i) = gt(perm[static_cast<size_t>(i)]);
    }

    PipelineConfig config;
    config.mining.k = 8;
    const std::vector<LayerSpec> specs = make_layer_specs(n);
    const PipelineResult base =
        forward_pipeline(PointCloud(pts, std::nullopt, gt, 3), specs, 77, config);
    const PipelineResult shuffled =
        forward_pipeline(PointCloud(permuted, std::nullopt, pgt, 3), specs, 77, config);

    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            REQUIRE(shuffled.final_probs(i, c) == base.final_probs(perm[static_cast<size_t>(i)], c));
        }
    }
    // The loss is a mean over points, so only its summation order differs.
    CHECK(shuffled.total_loss == doctest::Approx(base.total_loss).epsilon(1e-12));
}

TEST_CASE("forward pipeline is invariant to thread count") {
#ifdef _OPENMP
    const RowMat3d pts = fixtures::random_positions(320, 96);
    const PointCloud cloud(pts);
    const std::vector<LayerSpec> specs = make_layer_specs(320);
    PipelineConfig config;
    config.class_count = 6;
    config.mining.k = 8;

    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const PipelineResult one = forward_pipeline(cloud, specs, 55, config);
    omp_set_num_threads(std::max(2, saved));
    const PipelineResult many = forward_pipeline(cloud, specs, 55, config);
    omp_set_num_threads(saved);
    CHECK(one.final_probs == many.final_probs);
    for (int l = 0; l < 5; ++l) {
        CHECK(one.features.y[static_cast<size_t>(l)] == many.features.y[static_cast<size_t>(l)]);
    }
#endif
}

TEST_CASE("no non-finite values across seeds") {
    std::mt19937_64 rng(97);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 256 + static_cast<int>(rng() % 256);
        const RowMat3d pts = fixtures::random_positions(n, rng());
        const PointCloud cloud(pts);
        PipelineConfig config;
        config.class_count = 5;
        config.mining.k = 6;
        config.mode = trial % 2 == 0 ? NonlocalMode::attention : NonlocalMode::literal;
        const PipelineResult result =
            forward_pipeline(cloud, make_layer_specs(n), rng(), config);
        REQUIRE(result.final_probs.allFinite());
        for (const RowMatXf& x : result.features.x) REQUIRE(x.allFinite());
        for (const RowMatXf& y : result.features.y) REQUIRE(y.allFinite());
        for (const RowMatXd& z : result.features.z) REQUIRE(z.allFinite());
    }
}
