#include "hoconv/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "hoconv/core/errors.hpp"

namespace hoconv::analysis {

namespace {

Eigen::MatrixXd centered(const ActivationMatrix& m) {
    m.validate();
    if (m.rows() < 2) throw ShapeError("PCA needs at least two rows");
    Eigen::MatrixXd x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        m.values.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    x.rowwise() -= x.colwise().mean();
    return x;
}

PcaResult fractions_from_variances(std::vector<double> var) {
    for (auto& v : var) v = std::max(v, 0.0);
    std::sort(var.begin(), var.end(), std::greater<>());
    PcaResult r;
    const double total = std::accumulate(var.begin(), var.end(), 0.0);
    const double top = var.empty() ? 0.0 : var.front();
    if (total <= 0.0 || !(top > 0.0)) {
        r.fractions.assign(var.size(), 0.0);
        r.zero_variance = true;
        return r;
    }
    r.fractions.reserve(var.size());
    for (double v : var) r.fractions.push_back(v / total);
    return r;
}

void check_same(const Rdm& a, const Rdm& b) {
    if (a.matrix.shape() != b.matrix.shape()) {
        throw ShapeError("RDM shapes differ: " + shape_str(a.matrix.shape()) + " vs " + shape_str(b.matrix.shape()));
    }
}

}  // namespace

void ActivationMatrix::validate() const {
    if (values.rank() != 2) throw ShapeError("activation matrix must be rank 2, got " + shape_str(values.shape()));
    for (double v : values.data())
        if (!std::isfinite(v)) throw ParameterError("activation matrix contains NaN or Inf");
}

PcaResult pca_explained_variance(const ActivationMatrix& m) {
    const Eigen::MatrixXd x = centered(m);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
    const auto& s = svd.singularValues();
    std::vector<double> var(static_cast<std::size_t>(s.size()));
    for (Eigen::Index i = 0; i < s.size(); ++i) var[static_cast<std::size_t>(i)] = s[i] * s[i];
    if (x.cwiseAbs().maxCoeff() == 0.0) var.assign(var.size(), 0.0);
    return fractions_from_variances(std::move(var));
}

PcaResult pca_explained_variance_cov(const ActivationMatrix& m) {
    const Eigen::MatrixXd x = centered(m);
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(x.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    std::vector<double> var(ev.data(), ev.data() + ev.size());
    const auto rank_limit = static_cast<std::size_t>(std::min<Eigen::Index>(x.rows(), x.cols()));
    std::sort(var.begin(), var.end(), std::greater<>());
    var.resize(rank_limit);
    if (x.cwiseAbs().maxCoeff() == 0.0) var.assign(var.size(), 0.0);
    return fractions_from_variances(std::move(var));
}

int pc_count_for_threshold(const std::vector<double>& fractions, double t) {
    if (fractions.empty()) throw ParameterError("no variance fractions");
    double cum = 0.0;
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        cum += fractions[k];
        if (cum >= t - 1e-12) return static_cast<int>(k + 1);
    }
    return cum == 0.0 ? 1 : static_cast<int>(fractions.size());
}

ActivationMatrix tied_weight_activations(network::TextureModelKind kind, const Tensor& fixed_input,
                                         std::uint64_t seed, const TiedWeightConfig& cfg) {
    if (cfg.n_inits < 2) throw ParameterError("tied-weight experiment needs at least two inits");
    if (fixed_input.size() == 0) throw ShapeError("empty fixed input");
    const std::size_t h = fixed_input.dim(fixed_input.rank() - 2);
    const std::size_t w = fixed_input.dim(fixed_input.rank() - 1);
    if (fixed_input.size() != h * w) throw ShapeError("fixed input must be a single-channel image");
    const Tensor x = fixed_input.reshape({1, 1, h, w});

    const auto probe = network::build_texture_model(kind, 0, cfg.activation, static_cast<int>(h), static_cast<int>(w));
    const std::size_t dim = shape_size(probe.shape_after(network::kBlock1Layers - 1));

    ActivationMatrix out;
    out.values = Tensor({static_cast<std::size_t>(cfg.n_inits), dim});
    out.model_tag = kind.name();
    out.layer_tag = "block1";

    const int threads = std::max(1, std::min(cfg.threads, cfg.n_inits));
    auto work = [&](int t) {
        for (int i = t; i < cfg.n_inits; i += threads) {
            const std::uint64_t s = cfg.same_seed ? seed : derive_seed(seed, {static_cast<std::uint64_t>(i)});
            auto model = network::build_texture_model(kind, s, cfg.activation, static_cast<int>(h),
                                                      static_cast<int>(w));
            model.set_mode(network::Mode::train);
            const Tensor a = model.forward_prefix(x, network::kBlock1Layers);
            std::copy(a.vec().begin(), a.vec().end(),
                      out.values.vec().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * dim));
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }
    return out;
}

TiedWeightResult tied_weight_experiment(network::TextureModelKind kind, const Tensor& fixed_input,
                                        std::uint64_t seed, const TiedWeightConfig& cfg) {
    const auto acts = tied_weight_activations(kind, fixed_input, seed, cfg);
    const auto pca = pca_explained_variance(acts);
    TiedWeightResult r;
    r.model = kind.name();
    r.n_inits = cfg.n_inits;
    r.dim = acts.cols();
    r.fractions = pca.fractions;
    r.zero_variance = pca.zero_variance;
    r.pc_count = pc_count_for_threshold(pca.fractions, cfg.threshold);
    r.pc_fraction = static_cast<double>(r.pc_count) / static_cast<double>(r.dim);
    r.few_inits = static_cast<std::size_t>(cfg.n_inits) < r.dim;
    return r;
}

std::string_view metric_name(RdmMetric m) { return m == RdmMetric::corr ? "corr" : "corr01"; }

RdmMetric metric_from_name(std::string_view name) {
    if (name == "corr") return RdmMetric::corr;
    if (name == "corr01") return RdmMetric::corr01;
    throw ParameterError("unknown RDM metric '" + std::string(name) + "'");
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw ShapeError("pearson: vectors must be non-empty and equal length");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::nan("");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Rdm compute_rdm(const ActivationMatrix& acts, RdmMetric metric) {
    acts.validate();
    const std::size_t s = acts.rows(), d = acts.cols();
    if (s < 2) throw ShapeError("RDM needs at least two stimuli");
    Rdm rdm;
    rdm.metric = metric;
    rdm.matrix = Tensor({s, s});
    const double* base = acts.values.data().data();
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            const double r = pearson({base + i * d, d}, {base + j * d, d});
            double dist;
            if (std::isnan(r)) {
                rdm.constant_warning = true;
                dist = metric == RdmMetric::corr ? 1.0 : 0.5;
            } else {
                dist = metric == RdmMetric::corr ? 1.0 - r : (1.0 - r) / 2.0;
            }
            rdm.matrix.at(i, j) = dist;
            rdm.matrix.at(j, i) = dist;
        }
    }
    return rdm;
}

Rdm average_rdms(const std::vector<Rdm>& rdms) {
    if (rdms.empty()) throw ParameterError("no RDMs to average");
    Rdm out = rdms.front();
    for (std::size_t k = 1; k < rdms.size(); ++k) {
        check_same(out, rdms[k]);
        if (rdms[k].metric != out.metric) throw ParameterError("cannot average RDMs with different metrics");
        for (std::size_t i = 0; i < out.matrix.size(); ++i) out.matrix[i] += rdms[k].matrix[i];
        out.constant_warning = out.constant_warning || rdms[k].constant_warning;
    }
    const double n = static_cast<double>(rdms.size());
    for (auto& v : out.matrix.vec()) v /= n;
    return out;
}

std::string_view compare_mode_name(CompareMode m) {
    switch (m) {
        case CompareMode::log_ratio: return "log_ratio";
        case CompareMode::hellinger: return "hellinger";
        case CompareMode::abs_diff: return "abs_diff";
        case CompareMode::spearman: return "spearman";
    }
    return "abs_diff";
}

CompareMode compare_mode_from_name(std::string_view name) {
    for (auto m : {CompareMode::log_ratio, CompareMode::hellinger, CompareMode::abs_diff, CompareMode::spearman})
        if (compare_mode_name(m) == name) return m;
    throw ParameterError("unknown comparison mode '" + std::string(name) + "'");
}

RdmComparison rdm_compare(const Rdm& a, const Rdm& b, CompareMode mode) {
    check_same(a, b);
    RdmComparison r;
    r.mode = mode;
    if (mode == CompareMode::spearman) {
        const auto ua = upper_triangle(a), ub = upper_triangle(b);
        r.scalar = spearman(ua, ub);
        return r;
    }
    if (mode == CompareMode::hellinger && (a.metric != RdmMetric::corr01 || b.metric != RdmMetric::corr01)) {
        throw ParameterError("hellinger comparison requires corr01 RDMs");
    }
    r.map = Tensor(a.matrix.shape());
    for (std::size_t i = 0; i < a.matrix.size(); ++i) {
        const double x = a.matrix[i], y = b.matrix[i];
        switch (mode) {
            case CompareMode::log_ratio: r.map[i] = std::log((x + kLogRatioEps) / (y + kLogRatioEps)); break;
            case CompareMode::hellinger:
                r.map[i] = std::abs(std::sqrt(std::max(x, 0.0)) - std::sqrt(std::max(y, 0.0))) / std::sqrt(2.0);
                break;
            default: r.map[i] = std::abs(x - y); break;
        }
    }
    Rdm wrapped{r.map, a.metric, false};
    r.scalar = mean_dissimilarity(wrapped);
    return r;
}

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ShapeError("spearman: need two equal-length vectors of size >= 2");
    const auto ra = average_ranks(a), rb = average_ranks(b);
    return pearson(ra, rb);
}

std::vector<double> upper_triangle(const Rdm& rdm) {
    const std::size_t s = rdm.size();
    std::vector<double> out;
    out.reserve(s * (s - 1) / 2);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = i + 1; j < s; ++j) out.push_back(rdm.matrix.at(i, j));
    return out;
}

long Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }

int Histogram::local_maxima() const {
    int peaks = 0;
    const std::size_t n = counts.size();
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && counts[j + 1] == counts[i]) ++j;
        const bool left = i == 0 || counts[i - 1] < counts[i];
        const bool right = j + 1 == n || counts[j + 1] < counts[i];
        if (left && right && counts[i] > 0) ++peaks;
        i = j + 1;
    }
    return peaks;
}

Histogram distance_distribution(const Rdm& rdm, int n_bins) {
    if (n_bins < 1) throw ParameterError("n_bins must be at least 1");
    const auto v = upper_triangle(rdm);
    Histogram h;
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    if (v.empty()) {
        h.edges.assign(static_cast<std::size_t>(n_bins) + 1, 0.0);
        return h;
    }
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = *lo_it, hi = *hi_it;
    const double width = (hi - lo) / n_bins;
    for (int b = 0; b <= n_bins; ++b) h.edges.push_back(b == n_bins ? hi : lo + width * b);
    for (double x : v) {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((x - lo) / width) : 0;
        b = std::min(b, static_cast<std::size_t>(n_bins - 1));
        ++h.counts[b];
    }
    const double n = static_cast<double>(v.size());
    h.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - h.mean) * (x - h.mean);
    h.variance = ss / n;
    return h;
}

ActivationMatrix layer_activations(network::Model& model, const Tensor& stimuli, const std::string& tag) {
    const auto prev = model.mode();
    model.set_mode(network::Mode::eval);
    auto outs = model.forward_collect(stimuli, {tag});
    model.set_mode(prev);
    Tensor& t = outs.at(tag);
    const std::size_t n = t.dim(0);
    ActivationMatrix m;
    m.values = std::move(t).reshape({n, t.size() / n});
    m.layer_tag = tag;
    return m;
}

Rdm seed_averaged_rdm(std::vector<network::Model>& models, const Tensor& stimuli, const std::string& tag,
                      RdmMetric metric) {
    if (models.empty()) throw ParameterError("no models for RDM");
    std::vector<Rdm> rdms;
    rdms.reserve(models.size());
    for (auto& m : models) rdms.push_back(compute_rdm(layer_activations(m, stimuli, tag), metric));
    return average_rdms(rdms);
}

std::vector<LayerCorrelation> cross_layer_rdm_correlation(
    std::vector<network::Model>& models_a, std::vector<network::Model>& models_b, const Tensor& stimuli,
    const std::vector<std::pair<std::string, std::string>>& layer_pairs, RdmMetric metric) {
    auto has_tag = [](const std::vector<network::Model>& ms, const std::string& tag) {
        return !ms.empty() && std::ranges::count(ms.front().tags(), tag) > 0;
    };
    std::vector<LayerCorrelation> out;
    for (const auto& [ta, tb] : layer_pairs) {
        if (!has_tag(models_a, ta)) throw ParameterError("missing layer tag '" + ta + "' in first model set");
        if (!has_tag(models_b, tb)) throw ParameterError("missing layer tag '" + tb + "' in second model set");
        const Rdm ra = seed_averaged_rdm(models_a, stimuli, ta, metric);
        const Rdm rb = seed_averaged_rdm(models_b, stimuli, tb, metric);
        out.push_back({ta, tb, rdm_compare(ra, rb, CompareMode::spearman).scalar});
    }
    return out;
}

double mean_dissimilarity(const Rdm& rdm) {
    const auto v = upper_triangle(rdm);
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace hoconv::analysis
