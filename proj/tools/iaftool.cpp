// Batch front end: IPBM evaluation, subset extraction, indistinguishable
// point mining, eigen features, and the seeded forward reference.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "iaf/eigen_features.hpp"
#include "iaf/forward/pipeline.hpp"
#include "iaf/io.hpp"
#include "iaf/ipbm.hpp"
#include "iaf/mining.hpp"

namespace {

using iaf::PointCloud;

struct IpbmArgs {
    std::string gt_path, pred_path, report_path, ply_prefix;
    std::vector<std::string> subsets{"all"};
    iaf::IpbmConfig config;
    int classes = 0;
};

struct SubsetArgs {
    std::string cloud_path, mode, out_path;
    iaf::IpbmConfig config;
};

struct MineArgs {
    std::string cloud_path, preds_path, features_path, out_path, ld_dump_path;
    std::vector<double> mu{0.0, 0.0, 1.0};
    double tau = 4.0;
    int k = 16;
    std::string ld1_channels = "xyz";
};

struct FeaturesArgs {
    std::string cloud_path, out_path;
    int k = 16;
};

struct ForwardArgs {
    std::string cloud_path, out_path, summary_path;
    std::uint64_t seed = 0;
    int levels = 5, k1 = 16, k2 = 32, classes = 13, mine_k = 16;
    double tau = 4.0;
    std::vector<double> mu{0.0, 0.0, 1.0};
    std::string mode = "attention";
    bool no_residual = false;
};

std::vector<std::string> expand_subsets(const std::vector<std::string>& requested) {
    std::vector<std::string> names;
    for (const std::string& s : requested) {
        if (s == "all") {
            names.insert(names.end(), {"original", "category-boundary", "geometry-boundary"});
        } else if (s == "original" || s == "category" || s == "category-boundary") {
            names.push_back(s == "category" ? "category-boundary" : s);
        } else if (s == "geometry" || s == "geometry-boundary") {
            names.push_back("geometry-boundary");
        } else {
            throw iaf::ParameterError("unknown subset '" + s + "'");
        }
    }
    return names;
}

Eigen::VectorXi prediction_labels(const iaf::io::Predictions& preds) {
    return preds.has_probs ? iaf::io::argmax_labels(preds.probs) : preds.labels;
}

// Standard per-class IoU averaged over classes present in gt or prediction,
// plus overall accuracy. Convenience output only.
void print_miou_oa(const Eigen::VectorXi& pred, const Eigen::VectorXi& gt, int classes) {
    std::vector<long> tp(static_cast<size_t>(classes), 0);
    std::vector<long> fp(static_cast<size_t>(classes), 0);
    std::vector<long> fn(static_cast<size_t>(classes), 0);
    long correct = 0;
    for (Eigen::Index i = 0; i < gt.size(); ++i) {
        if (pred(i) == gt(i)) {
            ++correct;
            ++tp[static_cast<size_t>(gt(i))];
        } else {
            ++fp[static_cast<size_t>(pred(i))];
            ++fn[static_cast<size_t>(gt(i))];
        }
    }
    double iou_sum = 0.0;
    int iou_classes = 0;
    for (int c = 0; c < classes; ++c) {
        const long uni = tp[static_cast<size_t>(c)] + fp[static_cast<size_t>(c)] +
                         fn[static_cast<size_t>(c)];
        if (uni == 0) continue;
        iou_sum += static_cast<double>(tp[static_cast<size_t>(c)]) / static_cast<double>(uni);
        ++iou_classes;
    }
    const double miou = iou_classes > 0 ? iou_sum / iou_classes : 0.0;
    const double oa = static_cast<double>(correct) / static_cast<double>(gt.size());
    std::printf("mIoU %.6f   OA %.6f\n", miou, oa);
}

int run_ipbm(const IpbmArgs& args) {
    const PointCloud cloud = iaf::io::load_cloud(args.gt_path);
    if (!cloud.has_labels()) {
        throw iaf::ConfigError("ipbm: ground-truth labels required (7-column cloud file)");
    }
    const int classes = std::max(args.classes, cloud.class_count());
    const iaf::io::Predictions preds =
        iaf::io::load_predictions(args.pred_path, cloud.size(), classes);
    const Eigen::VectorXi pred = prediction_labels(preds);

    const std::vector<std::string> names = expand_subsets(args.subsets);
    const iaf::IpbmReport report = iaf::evaluate_ipbm(cloud, pred, args.config, names);

    std::printf("%-20s %10s %10s %10s %10s %10s\n", "subset", "n", "errors", "ISA", "CBA", "CIA");
    for (const iaf::SubsetResult& s : report.subsets) {
        std::printf("%-20s %10ld %10ld %10.6f %10.6f %10.6f\n", s.name.c_str(), s.n(),
                    s.s1 + s.s2 + s.s3, s.isa(), s.cba(), s.cia());
    }
    print_miou_oa(pred, cloud.gt_labels(), classes);

    if (!args.report_path.empty()) {
        iaf::io::write_report(report, args.report_path);
    }
    if (!args.ply_prefix.empty()) {
        for (const iaf::SubsetResult& s : report.subsets) {
            const iaf::RowMat3u8 colors = iaf::colorize_areas(s, cloud);
            iaf::io::write_ply(cloud.positions(), colors, args.ply_prefix + s.name + ".ply",
                               iaf::io::PlyFormat::binary_little_endian);
        }
    }
    return 0;
}

int run_subset(const SubsetArgs& args) {
    const PointCloud cloud = iaf::io::load_cloud(args.cloud_path);
    std::vector<int> subset;
    if (args.mode == "category") {
        if (!cloud.has_labels()) {
            throw iaf::ConfigError("subset --mode category: ground-truth labels required");
        }
        subset = iaf::category_boundary_subset(cloud, args.config);
    } else if (args.mode == "geometry") {
        subset = iaf::geometry_boundary_subset(cloud, args.config);
    } else {
        throw iaf::ParameterError("subset: unknown mode '" + args.mode + "'");
    }

    std::ofstream out(args.out_path);
    if (!out) throw iaf::IoError("cannot open '" + args.out_path + "' for writing");
    for (int idx : subset) out << idx << '\n';
    std::printf("%zu points\n", subset.size());
    return 0;
}

int run_mine(const MineArgs& args) {
    const PointCloud cloud = iaf::io::load_cloud(args.cloud_path);

    iaf::MiningConfig config;
    if (args.mu.size() != 3) throw iaf::ParameterError("mine: --mu needs three weights");
    config.mu = {args.mu[0], args.mu[1], args.mu[2]};
    config.tau = args.tau;
    config.k = args.k;
    if (args.ld1_channels == "xyz") {
        config.ld1_channels = iaf::Ld1Channels::xyz;
    } else if (args.ld1_channels == "xyzrgb") {
        config.ld1_channels = iaf::Ld1Channels::xyzrgb;
    } else {
        throw iaf::ParameterError("mine: --ld1-channels must be xyz or xyzrgb");
    }

    iaf::RowMatXd probs, feats;
    const iaf::RowMatXd* probs_ptr = nullptr;
    const iaf::RowMatXd* feats_ptr = nullptr;
    if (!args.preds_path.empty()) {
        const iaf::io::Predictions preds =
            iaf::io::load_predictions(args.preds_path, cloud.size(), 0);
        if (preds.has_probs) {
            probs = preds.probs;
        } else {  // one-hot rows from hard labels
            const int classes = preds.labels.maxCoeff() + 1;
            probs = iaf::RowMatXd::Zero(cloud.size(), classes);
            for (Eigen::Index i = 0; i < preds.labels.size(); ++i) {
                probs(i, preds.labels(i)) = 1.0;
            }
        }
        probs_ptr = &probs;
    }
    if (!args.features_path.empty()) {
        feats = iaf::io::load_matrix(args.features_path, cloud.size());
        feats_ptr = &feats;
    }

    const iaf::MiningResult result = iaf::mine(cloud, probs_ptr, feats_ptr, config);

    std::ofstream out(args.out_path);
    if (!out) throw iaf::IoError("cannot open '" + args.out_path + "' for writing");
    for (int idx : result.selected) out << idx << '\n';

    if (!args.ld_dump_path.empty()) {
        std::ofstream dump(args.ld_dump_path);
        if (!dump) throw iaf::IoError("cannot open '" + args.ld_dump_path + "' for writing");
        char line[160];
        for (Eigen::Index i = 0; i < result.ld_raw.rows(); ++i) {
            std::snprintf(line, sizeof(line), "%.17g %.17g %.17g %.17g\n", result.ld_raw(i, 0),
                          result.ld_raw(i, 1), result.ld_raw(i, 2), result.ld_accumulated(i));
            dump << line;
        }
    }
    std::printf("selected %zu of %d points\n", result.selected.size(), cloud.size());
    return 0;
}

int run_features(const FeaturesArgs& args) {
    const PointCloud cloud = iaf::io::load_cloud(args.cloud_path);
    const int k = std::max(3, std::min(args.k, cloud.size()));
    const iaf::KdTree3 tree = iaf::build_spatial_index(cloud);
    const iaf::NeighborList nbrs = iaf::knn(tree, k, /*self_inclusive=*/true);
    const iaf::RowMat3d tuples = iaf::eigen_tuples(cloud, nbrs);

    std::ofstream out(args.out_path);
    if (!out) throw iaf::IoError("cannot open '" + args.out_path + "' for writing");
    char line[120];
    for (Eigen::Index i = 0; i < tuples.rows(); ++i) {
        std::snprintf(line, sizeof(line), "%.17g %.17g %.17g\n", tuples(i, 0), tuples(i, 1),
                      tuples(i, 2));
        out << line;
    }
    std::printf("%ld tuples\n", static_cast<long>(tuples.rows()));
    return 0;
}

int run_forward(const ForwardArgs& args) {
    const PointCloud cloud = iaf::io::load_cloud(args.cloud_path);

    iaf::net::PipelineConfig config;
    config.levels = args.levels;
    config.k1 = args.k1;
    config.k2 = args.k2;
    config.mode = iaf::net::parse_nonlocal_mode(args.mode);
    config.residual = !args.no_residual;
    config.class_count = args.classes;
    config.mining.k = args.mine_k;
    config.mining.tau = args.tau;
    if (args.mu.size() != 3) throw iaf::ParameterError("forward: --mu needs three weights");
    config.mining.mu = {args.mu[0], args.mu[1], args.mu[2]};

    const std::vector<iaf::net::LayerSpec> specs =
        iaf::net::make_layer_specs(cloud.size(), args.levels, args.k1, args.k2);
    const iaf::net::PipelineResult result =
        iaf::net::forward_pipeline(cloud, specs, args.seed, config);

    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) throw iaf::IoError("cannot open '" + args.out_path + "' for writing");
        char buf[64];
        for (Eigen::Index i = 0; i < result.final_probs.rows(); ++i) {
            for (Eigen::Index c = 0; c < result.final_probs.cols(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.9g", result.final_probs(i, c));
                out << buf << (c + 1 < result.final_probs.cols() ? ' ' : '\n');
            }
        }
    }

    nlohmann::ordered_json summary;
    summary["seed"] = args.seed;
    summary["shapes"] = nlohmann::ordered_json::array();
    for (size_t l = 0; l < result.specs.size(); ++l) {
        summary["shapes"].push_back({{"level", result.specs[l].level},
                                     {"n", result.specs[l].n_points},
                                     {"d", result.specs[l].feat_width},
                                     {"k1", result.specs[l].k1},
                                     {"k2", result.specs[l].k2}});
    }
    if (result.has_losses) {
        summary["l_ms"] = result.stage_losses;
        summary["l_p"] = result.prediction_loss;
        summary["l_f"] = result.total_loss;
    }
    const std::string text = summary.dump(2) + "\n";
    if (!args.summary_path.empty()) {
        std::ofstream out(args.summary_path, std::ios::binary);
        if (!out) throw iaf::IoError("cannot open '" + args.summary_path + "' for writing");
        out << text;
    }
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-cloud segmentation analysis toolkit"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap worker threads (default: all cores)");
    app.fallthrough();  // global flags may follow the subcommand

    IpbmArgs ipbm_args;
    CLI::App* ipbm = app.add_subcommand("ipbm", "evaluate predictions with the IPBM scores");
    ipbm->add_option("--gt", ipbm_args.gt_path, "cloud file with ground-truth labels")->required();
    ipbm->add_option("--pred", ipbm_args.pred_path, "prediction file (labels or probabilities)")
        ->required();
    ipbm->add_option("--subset", ipbm_args.subsets,
                     "all | original | category | geometry (repeatable)");
    ipbm->add_option("--report", ipbm_args.report_path, "JSON report output path");
    ipbm->add_option("--ply-prefix", ipbm_args.ply_prefix, "write per-subset area PLY files");
    ipbm->add_option("--k", ipbm_args.config.k, "evaluation neighborhood size");
    ipbm->add_option("--zeta1", ipbm_args.config.zeta1, "lower interval split");
    ipbm->add_option("--zeta2", ipbm_args.config.zeta2, "upper interval split");
    ipbm->add_option("--rho", ipbm_args.config.rho, "category-boundary threshold factor");
    ipbm->add_option("--epsilon", ipbm_args.config.epsilon, "geometry-boundary fraction");
    ipbm->add_option("--classes", ipbm_args.classes, "class count (default: inferred)");

    SubsetArgs subset_args;
    CLI::App* subset = app.add_subcommand("subset", "extract an evaluation subset");
    subset->add_option("--cloud", subset_args.cloud_path, "cloud file")->required();
    subset->add_option("--mode", subset_args.mode, "category | geometry")->required();
    subset->add_option("--out", subset_args.out_path, "output file (one index per line)")
        ->required();
    subset->add_option("--k", subset_args.config.k, "neighborhood size");
    subset->add_option("--rho", subset_args.config.rho, "category-boundary threshold factor");
    subset->add_option("--epsilon", subset_args.config.epsilon, "geometry-boundary fraction");

    MineArgs mine_args;
    CLI::App* mine = app.add_subcommand("mine", "select indistinguishable points");
    mine->add_option("--cloud", mine_args.cloud_path, "cloud file")->required();
    mine->add_option("--preds", mine_args.preds_path, "prediction snapshot (labels or probs)");
    mine->add_option("--features", mine_args.features_path, "feature snapshot (N x D text)");
    mine->add_option("--mu", mine_args.mu, "three accumulation weights")->delimiter(',');
    mine->add_option("--tau", mine_args.tau, "selection ratio: keep floor(N/tau)");
    mine->add_option("--k", mine_args.k, "neighborhood size");
    mine->add_option("--ld1-channels", mine_args.ld1_channels, "xyz | xyzrgb");
    mine->add_option("--out", mine_args.out_path, "selected indices output")->required();
    mine->add_option("--ld-dump", mine_args.ld_dump_path, "columnar LD dump output");

    FeaturesArgs features_args;
    CLI::App* features = app.add_subcommand("features", "per-point eigenvalue tuples");
    features->add_option("--cloud", features_args.cloud_path, "cloud file")->required();
    features->add_option("--k", features_args.k, "neighborhood size");
    features->add_option("--out", features_args.out_path, "columnar tuple output")->required();

    ForwardArgs forward_args;
    CLI::App* forward = app.add_subcommand("forward", "seeded deterministic forward pass");
    forward->add_option("--cloud", forward_args.cloud_path, "cloud file")->required();
    forward->add_option("--seed", forward_args.seed, "weight seed")->required();
    forward->add_option("--levels", forward_args.levels, "encoder depth");
    forward->add_option("--k1", forward_args.k1, "first receptive field");
    forward->add_option("--k2", forward_args.k2, "second receptive field");
    forward->add_option("--mode", forward_args.mode, "nonlocal mode: literal | attention");
    forward->add_flag("--no-residual", forward_args.no_residual, "disable the residual path");
    forward->add_option("--classes", forward_args.classes, "class count");
    forward->add_option("--mine-k", forward_args.mine_k, "mining neighborhood size");
    forward->add_option("--tau", forward_args.tau, "mining selection ratio");
    forward->add_option("--mu", forward_args.mu, "mining accumulation weights")->delimiter(',');
    forward->add_option("--out", forward_args.out_path, "final probabilities output");
    forward->add_option("--summary", forward_args.summary_path, "JSON summary output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (ipbm->parsed()) return run_ipbm(ipbm_args);
        if (subset->parsed()) return run_subset(subset_args);
        if (mine->parsed()) return run_mine(mine_args);
        if (features->parsed()) return run_features(features_args);
        if (forward->parsed()) return run_forward(forward_args);
    } catch (const iaf::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
