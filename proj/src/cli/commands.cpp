#include "hoconv/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hoconv/analysis/analysis.hpp"
#include "hoconv/cli/checkpoint.hpp"
#include "hoconv/core/errors.hpp"
#include "hoconv/core/io.hpp"
#include "hoconv/core/parallel.hpp"
#include "hoconv/network/builders.hpp"
#include "hoconv/network/train.hpp"
#include "hoconv/textures/gliders.hpp"
#include "hoconv/volterra/ho_layer.hpp"

namespace hoconv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// CSV text whose first line records the producing tool and config hash.
class Csv {
public:
    Csv(const ExperimentConfig& cfg, const std::vector<std::string>& header) {
        text_ << "# tool=" << kToolName << " version=" << kToolVersion << " command=" << cfg.command()
              << " config_sha256=" << cfg.sha256() << "\n";
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text_ << (i ? "," : "") << cells[i];
        text_ << "\n";
    }
    void write(const fs::path& path) const { write_file_atomic(path, text_.str()); }

private:
    std::ostringstream text_;
};

json stamp(const ExperimentConfig& cfg) {
    return {{"tool", kToolName},
            {"version", kToolVersion},
            {"command", cfg.command()},
            {"config_sha256", cfg.sha256()},
            {"config", cfg.values()}};
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void say(const RunContext& ctx, const std::string& msg) {
    static std::mutex mu;
    if (!ctx.log) return;
    std::lock_guard lock(mu);
    *ctx.log << msg << std::endl;
}

textures::Split split_from_name(const std::string& name) {
    if (name == "train") return textures::Split::train;
    if (name == "val") return textures::Split::val;
    if (name == "test") return textures::Split::test;
    throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

fs::path split_path(const fs::path& data_dir, textures::Split s) {
    return data_dir / (std::string(textures::split_name(s)) + ".hotx");
}

textures::TextureDataset load_split(const fs::path& data_dir, textures::Split s) {
    const auto path = split_path(data_dir, s);
    if (!fs::exists(path)) throw IoError("dataset file not found: " + path.string());
    return textures::read_hotx(path, s);
}

void check_matches(network::Model& model, const textures::TextureDataset& ds, const std::string& what) {
    const Shape want{1, static_cast<std::size_t>(ds.height), static_cast<std::size_t>(ds.width)};
    if (model.input_shape() != want) {
        throw ConfigError(what + " expects input " + shape_str(model.input_shape()) + " but the dataset has images " +
                          shape_str(want));
    }
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<std::string> class_header(const std::string& corner) {
    std::vector<std::string> h{corner};
    for (auto c : textures::all_classes()) h.emplace_back(textures::class_name(c));
    return h;
}

std::vector<network::Model> load_models(const fs::path& dir, const std::string& model,
                                        const std::vector<std::uint64_t>& seeds) {
    std::vector<network::Model> out;
    for (auto s : seeds) {
        const auto path = dir / checkpoint_relpath(model, s);
        if (!fs::exists(path)) throw IoError("missing checkpoint: " + path.string());
        out.push_back(read_checkpoint(path));
    }
    return out;
}

void write_matrix_csv(const ExperimentConfig& cfg, const fs::path& path, const Tensor& m) {
    const std::size_t n = m.dim(0);
    std::vector<std::string> header{"row"};
    for (std::size_t j = 0; j < n; ++j) header.push_back("s" + std::to_string(j));
    Csv csv(cfg, header);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> row{"s" + std::to_string(i)};
        for (std::size_t j = 0; j < n; ++j) row.push_back(num(m.at(i, j)));
        csv.row(row);
    }
    csv.write(path);
}

}  // namespace

std::string checkpoint_relpath(const std::string& model, std::uint64_t seed) {
    return model + "/seed_" + std::to_string(seed) + ".hock";
}

CommandResult cmd_gen(const ExperimentConfig& cfg, const RunContext& ctx) {
    const fs::path out = cfg.out_dir();
    const int h = cfg.get<int>("height"), w = cfg.get<int>("width");
    const double level = cfg.get<double>("level");
    const auto seed = cfg.get<std::uint64_t>("seed");
    const textures::DatasetSizes sizes{cfg.get<int>("train_size"), cfg.get<int>("val_size"), cfg.get<int>("test_size")};

    json summary = stamp(cfg);
    summary["level"] = level;
    summary["seed"] = seed;
    summary["height"] = h;
    summary["width"] = w;
    summary["class_names"] = json::array();
    for (auto c : textures::all_classes()) summary["class_names"].push_back(textures::class_name(c));

    const textures::Split splits[] = {textures::Split::train, textures::Split::val, textures::Split::test};
    const int counts[] = {sizes.train, sizes.val, sizes.test};
    std::vector<textures::TextureDataset> generated(3);
    try {
        parallel_for(3, ctx.threads, [&](std::size_t i) {
            generated[i] = textures::generate_split(splits[i], counts[i], h, w, level, seed);
        });
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    for (std::size_t i = 0; i < 3; ++i) {
        const auto path = split_path(out, splits[i]);
        const Bytes bytes = textures::encode_hotx(generated[i]);
        write_file_atomic(path, bytes);
        const auto cc = generated[i].class_counts();
        summary["splits"][std::string(textures::split_name(splits[i]))] = {
            {"file", path.filename().string()},
            {"count", generated[i].size()},
            {"class_counts", std::vector<long>(cc.begin(), cc.end())},
            {"sha256", sha256_hex({reinterpret_cast<const char*>(bytes.data()), bytes.size()})}};
        say(ctx, "wrote " + path.string() + " (" + std::to_string(generated[i].size()) + " images)");
    }
    write_json(out / "manifest.json", summary);
    return {summary, kExitOk};
}

CommandResult cmd_train(const ExperimentConfig& cfg, const RunContext& ctx) {
    const fs::path out = cfg.out_dir();
    const fs::path data = cfg.get<std::string>("data");
    const auto kind = network::TextureModelKind::parse(cfg.get<std::string>("model"));
    const auto activation = cfg.get<std::string>("activation");
    network::act_from_name(activation);
    const auto seeds = cfg.seeds();

    network::TrainConfig tc;
    tc.lr = cfg.get<double>("lr");
    tc.weight_decay = cfg.get<double>("weight_decay");
    tc.batch_size = cfg.get<int>("batch_size");
    tc.max_epochs = cfg.get<int>("max_epochs");
    tc.plateau_patience = cfg.get<int>("plateau_patience");
    tc.plateau_factor = cfg.get<double>("plateau_factor");
    tc.early_stop_patience = cfg.get<int>("early_stop_patience");
    try {
        tc.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }

    const auto train_ds = load_split(data, textures::Split::train);
    const auto val_ds = load_split(data, textures::Split::val);
    const auto test_ds = load_split(data, textures::Split::test);
    const auto train_set = train_ds.to_labeled(), val_set = val_ds.to_labeled(), test_set = test_ds.to_labeled();

    struct SeedOutcome {
        bool ok = false;
        double accuracy = 0.0;
        double loss = 0.0;
        int best_epoch = -1;
        int epochs = 0;
        std::string error;
        int error_epoch = -1;
    };
    std::vector<SeedOutcome> outcomes(seeds.size());

    parallel_for(seeds.size(), ctx.threads, [&](std::size_t i) {
        const auto seed = seeds[i];
        auto model = network::build_texture_model(kind, derive_seed(seed, {0x1A17}), activation, train_ds.height,
                                                  train_ds.width);
        network::TrainConfig c = tc;
        c.seed = derive_seed(seed, {0x5EED});
        Csv history(cfg, {"epoch", "train_loss", "val_loss", "val_acc", "lr"});
        auto& o = outcomes[i];
        try {
            auto result = network::train(std::move(model), train_set, val_set, c, [&](const network::EpochRecord& e) {
                history.row({std::to_string(e.epoch), num(e.train_loss), num(e.val_loss), num(e.val_acc), num(e.lr)});
            });
            const auto ev = network::evaluate(result.model, test_set);
            write_checkpoint(out / checkpoint_relpath(kind.name(), seed), result.model);
            o.ok = true;
            o.accuracy = ev.accuracy;
            o.loss = ev.loss;
            o.best_epoch = result.history.best_epoch;
            o.epochs = static_cast<int>(result.history.epochs.size());
            say(ctx, kind.name() + " seed " + std::to_string(seed) + ": test accuracy " + num(100.0 * ev.accuracy) +
                         "% after " + std::to_string(o.epochs) + " epochs");
        } catch (const DivergenceError& e) {
            o.error = e.what();
            o.error_epoch = e.epoch();
            say(ctx, kind.name() + " seed " + std::to_string(seed) + " diverged: " + e.what());
        }
        history.write(out / kind.name() / ("seed_" + std::to_string(seed) + "_history.csv"));
    });

    json summary = stamp(cfg);
    summary["model"] = kind.name();
    summary["runs"] = json::array();
    summary["failures"] = json::array();
    std::vector<double> accs;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& o = outcomes[i];
        if (o.ok) {
            accs.push_back(100.0 * o.accuracy);
            summary["runs"].push_back({{"seed", seeds[i]},
                                       {"test_accuracy", 100.0 * o.accuracy},
                                       {"test_loss", o.loss},
                                       {"best_epoch", o.best_epoch},
                                       {"epochs", o.epochs},
                                       {"checkpoint", checkpoint_relpath(kind.name(), seeds[i])}});
        } else {
            summary["failures"].push_back({{"seed", seeds[i]}, {"epoch", o.error_epoch}, {"error", o.error}});
        }
    }
    summary["accuracies"] = accs;
    summary["mean_accuracy"] = mean_of(accs);
    summary["std_accuracy"] = sample_std(accs);
    write_json(out / kind.name() / "summary.json", summary);
    return {summary, summary["failures"].empty() ? kExitOk : kExitDivergence};
}

CommandResult cmd_eval(const ExperimentConfig& cfg, const RunContext& ctx) {
    const fs::path out = cfg.out_dir();
    const fs::path ckpt = cfg.get<std::string>("checkpoint");
    if (ckpt.empty()) throw ConfigError("eval needs a checkpoint path");
    if (!fs::exists(ckpt)) throw IoError("checkpoint not found: " + ckpt.string());
    const auto split = split_from_name(cfg.get<std::string>("split"));
    auto model = read_checkpoint(ckpt);
    const auto ds = load_split(cfg.get<std::string>("data"), split);
    check_matches(model, ds, "checkpoint " + ckpt.string());
    const auto ev = network::evaluate(model, ds.to_labeled());

    const std::string stem = ckpt.stem().string() + "_" + std::string(textures::split_name(split));
    Csv csv(cfg, class_header("true\\predicted"));
    for (std::size_t t = 0; t < ev.confusion.size(); ++t) {
        std::vector<std::string> row{std::string(textures::class_name(textures::class_from_index(static_cast<int>(t))))};
        for (long v : ev.confusion[t]) row.push_back(std::to_string(v));
        csv.row(row);
    }
    csv.row({"accuracy", num(100.0 * ev.accuracy)});
    csv.write(out / ("confusion_" + stem + ".csv"));

    json summary = stamp(cfg);
    summary["checkpoint"] = ckpt.string();
    summary["split"] = textures::split_name(split);
    summary["images"] = ds.size();
    summary["accuracy"] = 100.0 * ev.accuracy;
    summary["loss"] = ev.loss;
    summary["confusion"] = ev.confusion;
    write_json(out / ("eval_" + stem + ".json"), summary);
    say(ctx, "accuracy " + num(100.0 * ev.accuracy) + "% on " + std::to_string(ds.size()) + " images");
    return {summary, kExitOk};
}

CommandResult cmd_pca_tied(const ExperimentConfig& cfg, const RunContext& ctx) {
    const fs::path out = cfg.out_dir();
    const auto seed = cfg.get<std::uint64_t>("seed");
    const double level = cfg.get<double>("level");
    const auto models = cfg.get<std::vector<std::string>>("models");
    const auto acts = cfg.get<std::vector<std::string>>("nonlinearities");
    for (const auto& a : acts) network::act_from_name(a);
    std::vector<network::TextureModelKind> kinds;
    for (const auto& m : models) kinds.push_back(network::TextureModelKind::parse(m));

    const Tensor input = textures::composite_texture(32, 32, level, seed).to_tensor();
    const std::map<std::string, std::pair<int, int>> reference = {
        {"cnn", {87, 9610}}, {"hocnn2", {102, 1922}}, {"hocnn3", {159, 1922}}};

    Csv curves(cfg, {"activation", "model", "component", "fraction", "cumulative"});
    json summary = stamp(cfg);
    summary["results"] = json::array();
    for (const auto& act : acts) {
        for (const auto& kind : kinds) {
            analysis::TiedWeightConfig tc;
            tc.n_inits = cfg.get<int>("n_inits");
            tc.threshold = cfg.get<double>("threshold");
            tc.activation = act;
            tc.threads = ctx.threads;
            const auto r = analysis::tied_weight_experiment(kind, input, derive_seed(seed, {0x717E}), tc);
            double cum = 0.0;
            for (std::size_t k = 0; k < r.fractions.size(); ++k) {
                cum += r.fractions[k];
                curves.row({act, r.model, std::to_string(k + 1), num(r.fractions[k]), num(std::min(cum, 1.0))});
            }
            json rec = {{"activation", act},          {"model", r.model},         {"n_inits", r.n_inits},
                        {"dim", r.dim},               {"pc_count", r.pc_count},   {"pc_fraction", r.pc_fraction},
                        {"zero_variance", r.zero_variance}, {"few_inits", r.few_inits}};
            if (auto it = reference.find(r.model); it != reference.end()) {
                rec["reference_pc_count"] = it->second.first;
                rec["reference_dim"] = it->second.second;
                rec["reference_pc_fraction"] = static_cast<double>(it->second.first) / it->second.second;
            }
            summary["results"].push_back(rec);
            say(ctx, act + " " + r.model + ": k=" + std::to_string(r.pc_count) + " of " + std::to_string(r.dim) +
                         " (" + num(100.0 * r.pc_fraction) + "%)");
        }
    }
    curves.write(out / "pca_curves.csv");
    write_json(out / "pca_summary.json", summary);
    return {summary, kExitOk};
}

CommandResult cmd_rsa(const ExperimentConfig& cfg, const RunContext& ctx) {
    const fs::path out = cfg.out_dir();
    const fs::path ckpts = cfg.get<std::string>("checkpoints");
    const auto seeds = cfg.seeds();
    const auto name_a = network::TextureModelKind::parse(cfg.get<std::string>("model_a")).name();
    const auto name_b = network::TextureModelKind::parse(cfg.get<std::string>("model_b")).name();
    const auto layers = cfg.get<std::vector<std::string>>("layers");
    const int per_class = cfg.get<int>("stimuli_per_class");
    const int n_bins = cfg.get<int>("n_bins");

    const auto test = load_split(cfg.get<std::string>("data"), textures::Split::test);
    const std::size_t n_stim = static_cast<std::size_t>(per_class) * textures::kNumClasses;
    if (n_stim > test.size()) throw ConfigError("not enough test images for the requested stimuli");
    std::vector<std::size_t> idx(n_stim);
    std::iota(idx.begin(), idx.end(), 0);
    const Tensor stimuli = gather_images(test.to_labeled().images, idx);

    auto models_a = load_models(ckpts, name_a, seeds);
    auto models_b = load_models(ckpts, name_b, seeds);
    for (auto& m : models_a) check_matches(m, test, name_a + " checkpoint");
    for (auto& m : models_b) check_matches(m, test, name_b + " checkpoint");

    json summary = stamp(cfg);
    summary["stimuli"] = n_stim;
    summary["layers"] = json::array();
    for (const auto& tag : layers) {
        for (const auto* set : {&models_a, &models_b}) {
            const auto tags = set->front().tags();
            if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
                throw ConfigError("missing layer tag '" + tag + "'");
            }
        }
        const auto ra = analysis::seed_averaged_rdm(models_a, stimuli, tag);
        const auto rb = analysis::seed_averaged_rdm(models_b, stimuli, tag);
        const auto ra01 = analysis::seed_averaged_rdm(models_a, stimuli, tag, analysis::RdmMetric::corr01);
        const auto rb01 = analysis::seed_averaged_rdm(models_b, stimuli, tag, analysis::RdmMetric::corr01);
        write_matrix_csv(cfg, out / ("rdm_" + name_a + "_" + tag + ".csv"), ra.matrix);
        write_matrix_csv(cfg, out / ("rdm_" + name_b + "_" + tag + ".csv"), rb.matrix);
        const auto lr = analysis::rdm_compare(ra, rb, analysis::CompareMode::log_ratio);
        const auto hd = analysis::rdm_compare(ra01, rb01, analysis::CompareMode::hellinger);
        write_matrix_csv(cfg, out / ("log_ratio_" + tag + ".csv"), lr.map);
        write_matrix_csv(cfg, out / ("hellinger_" + tag + ".csv"), hd.map);

        json layer = {{"tag", tag},
                      {"log_ratio_mean", lr.scalar},
                      {"hellinger_mean", hd.scalar},
                      {"spearman", analysis::rdm_compare(ra, rb, analysis::CompareMode::spearman).scalar}};
        for (const auto& [name, rdm] : {std::pair{name_a, &ra}, std::pair{name_b, &rb}}) {
            const auto hist = analysis::distance_distribution(*rdm, n_bins);
            Csv csv(cfg, {"bin_low", "bin_high", "count"});
            for (std::size_t b = 0; b < hist.counts.size(); ++b) {
                csv.row({num(hist.edges[b]), num(hist.edges[b + 1]), std::to_string(hist.counts[b])});
            }
            csv.write(out / ("hist_" + name + "_" + tag + ".csv"));
            layer[name] = {{"mean_dissimilarity", hist.mean},
                           {"variance", hist.variance},
                           {"constant_warning", rdm->constant_warning}};
        }
        summary["layers"].push_back(layer);
        say(ctx, tag + ": mean dissimilarity " + name_a + " " + num(layer[name_a]["mean_dissimilarity"]) + ", " +
                     name_b + " " + num(layer[name_b]["mean_dissimilarity"]));
    }

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& tag : layers) pairs.emplace_back(tag, tag);
    const auto corr = analysis::cross_layer_rdm_correlation(models_a, models_b, stimuli, pairs);
    Csv cross(cfg, {"layer_a", "layer_b", "spearman"});
    for (const auto& c : corr) cross.row({c.tag_a, c.tag_b, num(c.spearman)});
    cross.write(out / "cross_layer.csv");
    write_json(out / "rsa_summary.json", summary);
    return {summary, kExitOk};
}

CommandResult cmd_perturb(const ExperimentConfig& cfg, const RunContext& ctx) {
    const fs::path out = cfg.out_dir();
    const fs::path ckpts = cfg.get<std::string>("checkpoints");
    const auto seeds = cfg.seeds();
    const auto tex_seed = cfg.get<std::uint64_t>("texture_seed");
    const double level = cfg.get<double>("level");
    std::vector<double> intensities{0.0};
    for (double v : cfg.get<std::vector<double>>("intensities")) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("intensities must lie in [0, 1]");
        if (v != 0.0) intensities.push_back(v);
    }

    const auto test = load_split(cfg.get<std::string>("data"), textures::Split::test);
    const auto clean = test.to_labeled();
    const std::size_t n = test.size();
    const std::size_t hw = static_cast<std::size_t>(test.height * test.width);

    // One perturbation texture per (class, image), shared by every model and intensity.
    std::vector<std::vector<std::uint8_t>> textures_by_class(textures::kNumClasses);
    parallel_for(textures::kNumClasses, ctx.threads, [&](std::size_t k) {
        auto& buf = textures_by_class[k];
        buf.resize(n * hw);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng(derive_seed(tex_seed, {k, i}));
            const auto img = textures::generate_texture(textures::class_from_index(static_cast<int>(k)), test.height,
                                                        test.width, level, rng);
            std::copy(img.pixels.begin(), img.pixels.end(), buf.begin() + static_cast<std::ptrdiff_t>(i * hw));
        }
    });

    Csv csv(cfg, {"model", "seed", "perturbation", "intensity", "accuracy", "normalized_accuracy"});
    json summary = stamp(cfg);
    summary["results"] = json::array();
    for (const auto& m : cfg.get<std::vector<std::string>>("models")) {
        const auto name = network::TextureModelKind::parse(m).name();
        auto models = load_models(ckpts, name, seeds);
        for (auto& model : models) check_matches(model, test, name + " checkpoint");
        // acc[seed][class][intensity]
        std::vector<std::vector<std::vector<double>>> acc(
            seeds.size(), std::vector<std::vector<double>>(textures::kNumClasses, std::vector<double>(intensities.size())));
        parallel_for(seeds.size(), ctx.threads, [&](std::size_t s) {
            for (int k = 0; k < textures::kNumClasses; ++k) {
                const auto& tex = textures_by_class[static_cast<std::size_t>(k)];
                for (std::size_t q = 0; q < intensities.size(); ++q) {
                    LabeledSet mixed{Tensor(clean.images.shape()), clean.labels};
                    const double I = intensities[q];
                    for (std::size_t j = 0; j < clean.images.size(); ++j) {
                        mixed.images[j] = (1.0 - I) * clean.images[j] + I * tex[j];
                    }
                    acc[s][static_cast<std::size_t>(k)][q] = 100.0 * network::evaluate(models[s], mixed).accuracy;
                }
            }
        });
        for (int k = 0; k < textures::kNumClasses; ++k) {
            const std::string pname(textures::class_name(textures::class_from_index(k)));
            for (std::size_t q = 0; q < intensities.size(); ++q) {
                std::vector<double> raw, norm;
                for (std::size_t s = 0; s < seeds.size(); ++s) {
                    const auto& a = acc[s][static_cast<std::size_t>(k)];
                    raw.push_back(a[q]);
                    norm.push_back(a[0] > 0.0 ? 100.0 * a[q] / a[0] : 0.0);
                    csv.row({name, std::to_string(seeds[s]), pname, num(intensities[q]), num(a[q]), num(norm.back())});
                }
                csv.row({name, "mean", pname, num(intensities[q]), num(mean_of(raw)), num(mean_of(norm))});
                summary["results"].push_back({{"model", name},
                                              {"perturbation", pname},
                                              {"intensity", intensities[q]},
                                              {"accuracy", mean_of(raw)},
                                              {"normalized_accuracy", mean_of(norm)}});
            }
        }
        say(ctx, "perturbation sweep done for " + name);
    }
    csv.write(out / "perturb.csv");
    write_json(out / "perturb_summary.json", summary);
    return {summary, kExitOk};
}

CommandResult cmd_flops(const ExperimentConfig& cfg, const RunContext& ctx) {
    const fs::path out = cfg.out_dir();
    volterra::LayerGeometry g;
    g.c_in = cfg.get<int>("c_in");
    g.kh = cfg.get<int>("kh");
    g.kw = cfg.get<int>("kw");
    const int max_order = cfg.get<int>("max_order");
    if (max_order > 4) throw ConfigError("max_order must be 1..4");
    const volterra::HoConvLayer layer(cfg.get<int>("c_out"), max_order, g);
    const auto flops = volterra::flop_count(
        layer, {static_cast<std::size_t>(g.c_in), cfg.get<std::size_t>("height"), cfg.get<std::size_t>("width")});
    const auto params = volterra::param_count(layer);
    const int n = g.c_in * g.kh * g.kw;

    Csv csv(cfg, {"order", "unique_weights", "parameters", "weight_flops", "product_flops", "total_flops",
                  "ratio_to_order1"});
    json summary = stamp(cfg);
    summary["out_h"] = flops.out_h;
    summary["out_w"] = flops.out_w;
    summary["orders"] = json::array();
    for (const auto& o : flops.orders) {
        const auto p = static_cast<std::size_t>(o.order - 1);
        const auto unique = volterra::unique_count(n, o.order);
        csv.row({std::to_string(o.order), std::to_string(unique), std::to_string(params.per_order[p]),
                 std::to_string(o.weight_flops), std::to_string(o.product_flops), std::to_string(o.total),
                 num(o.ratio_to_order1)});
        summary["orders"].push_back({{"order", o.order},
                                     {"unique_weights", unique},
                                     {"parameters", params.per_order[p]},
                                     {"weight_flops", o.weight_flops},
                                     {"product_flops", o.product_flops},
                                     {"total_flops", o.total},
                                     {"ratio_to_order1", o.ratio_to_order1}});
        say(ctx, "order " + std::to_string(o.order) + ": " + num(o.ratio_to_order1) + "x order 1");
    }
    summary["bias_parameters"] = params.bias;
    summary["total_parameters"] = params.total;
    summary["bias_flops"] = flops.bias_flops;
    summary["total_flops"] = flops.total;
    csv.write(out / "flops.csv");
    write_json(out / "flops.json", summary);
    return {summary, kExitOk};
}

CommandResult run_command(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto& c = cfg.command();
    if (c == "gen") return cmd_gen(cfg, ctx);
    if (c == "train") return cmd_train(cfg, ctx);
    if (c == "eval") return cmd_eval(cfg, ctx);
    if (c == "pca-tied") return cmd_pca_tied(cfg, ctx);
    if (c == "rsa") return cmd_rsa(cfg, ctx);
    if (c == "perturb") return cmd_perturb(cfg, ctx);
    if (c == "flops") return cmd_flops(cfg, ctx);
    throw ConfigError("unknown command '" + c + "'");
}

int exit_code_for_current_exception(std::string& message) {
    try {
        throw;
    } catch (const ConfigError& e) {
        message = std::string("config error: ") + e.what();
        return kExitConfig;
    } catch (const DivergenceError& e) {
        message = std::string("divergence: ") + e.what();
        return kExitDivergence;
    } catch (const IoError& e) {
        message = std::string("I/O error: ") + e.what();
        return kExitIo;
    } catch (const FormatError& e) {
        message = std::string("I/O error: ") + e.what();
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        message = std::string("config error: ") + e.what();
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        message = std::string("config error: ") + e.what();
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        message = std::string("I/O error: ") + e.what();
        return kExitIo;
    } catch (const std::exception& e) {
        message = std::string("error: ") + e.what();
        return 1;
    }
}

}  // namespace hoconv::cli
