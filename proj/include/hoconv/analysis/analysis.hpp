#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hoconv/core/tensor.hpp"
#include "hoconv/network/builders.hpp"
#include "hoconv/network/model.hpp"

namespace hoconv::analysis {

/// Observations (rows) by flattened activation units (columns).
struct ActivationMatrix {
    Tensor values;  // rank 2
    std::string model_tag;
    std::string layer_tag;

    std::size_t rows() const { return values.dim(0); }
    std::size_t cols() const { return values.dim(1); }
    /// Throws ShapeError unless rank 2, ParameterError on NaN/Inf.
    void validate() const;
};

struct PcaResult {
    std::vector<double> fractions;  // descending, sums to 1 (or all zero)
    bool zero_variance = false;
};

/// Explained-variance fractions from the singular values of the
/// column-centered matrix. Requires at least two rows.
PcaResult pca_explained_variance(const ActivationMatrix& m);

/// Same fractions from a symmetric eigen-solve of the covariance matrix.
/// Slower; used to cross-check the SVD path.
PcaResult pca_explained_variance_cov(const ActivationMatrix& m);

/// Smallest k whose cumulative fraction reaches t. All-zero fractions give 1.
int pc_count_for_threshold(const std::vector<double>& fractions, double t = 0.95);

struct TiedWeightResult {
    std::string model;
    int n_inits = 0;
    std::size_t dim = 0;  // flattened block1 activation size
    int pc_count = 0;     // k at the threshold
    double pc_fraction = 0.0;
    std::vector<double> fractions;
    bool zero_variance = false;
    bool few_inits = false;  // n_inits < dim
};

struct TiedWeightConfig {
    int n_inits = 1000;
    double threshold = 0.95;
    std::string activation = "relu";
    int threads = 1;
    /// Reuse one seed for every init (degenerate control).
    bool same_seed = false;
};

/// Activations of block1 (first layer, BatchNorm with batch statistics,
/// activation, pool) on one fixed image, one row per random initialization.
ActivationMatrix tied_weight_activations(network::TextureModelKind kind, const Tensor& fixed_input,
                                         std::uint64_t seed, const TiedWeightConfig& cfg);

TiedWeightResult tied_weight_experiment(network::TextureModelKind kind, const Tensor& fixed_input,
                                        std::uint64_t seed, const TiedWeightConfig& cfg = {});

enum class RdmMetric { corr, corr01 };
std::string_view metric_name(RdmMetric m);
RdmMetric metric_from_name(std::string_view name);

struct Rdm {
    Tensor matrix;  // (S, S)
    RdmMetric metric = RdmMetric::corr;
    bool constant_warning = false;  // some stimulus had zero-variance activations

    std::size_t size() const { return matrix.dim(0); }
};

double pearson(std::span<const double> a, std::span<const double> b);

/// Pairwise dissimilarity between the rows of `acts`.
Rdm compute_rdm(const ActivationMatrix& acts, RdmMetric metric = RdmMetric::corr);

/// Elementwise mean of RDMs with a common size and metric.
Rdm average_rdms(const std::vector<Rdm>& rdms);

enum class CompareMode { log_ratio, hellinger, abs_diff, spearman };
std::string_view compare_mode_name(CompareMode m);
CompareMode compare_mode_from_name(std::string_view name);

struct RdmComparison {
    CompareMode mode = CompareMode::abs_diff;
    Tensor map;           // elementwise modes; empty for spearman
    double scalar = 0.0;  // spearman rho, or mean upper-triangle value of the map
};

inline constexpr double kLogRatioEps = 1e-8;

RdmComparison rdm_compare(const Rdm& a, const Rdm& b, CompareMode mode);

/// Ranks with ties replaced by their average (1-based).
std::vector<double> average_ranks(std::span<const double> v);
double spearman(std::span<const double> a, std::span<const double> b);

/// Strict upper triangle, row-major.
std::vector<double> upper_triangle(const Rdm& rdm);

struct Histogram {
    std::vector<double> edges;  // n_bins + 1
    std::vector<long> counts;
    double mean = 0.0;
    double variance = 0.0;  // population variance
    long total() const;
    /// Number of strict local maxima in the counts (plateaus count once).
    int local_maxima() const;
};

Histogram distance_distribution(const Rdm& rdm, int n_bins);

/// Activations of one tagged layer for every stimulus (eval mode).
ActivationMatrix layer_activations(network::Model& model, const Tensor& stimuli, const std::string& tag);

/// Seed-averaged RDM of one layer across several trained models.
Rdm seed_averaged_rdm(std::vector<network::Model>& models, const Tensor& stimuli, const std::string& tag,
                      RdmMetric metric = RdmMetric::corr);

struct LayerCorrelation {
    std::string tag_a;
    std::string tag_b;
    double spearman = 0.0;
};

/// Spearman correlation between seed-averaged RDMs of matching layers, in
/// the order of `layer_pairs`. Throws ParameterError for an unknown tag.
std::vector<LayerCorrelation> cross_layer_rdm_correlation(std::vector<network::Model>& models_a,
                                                          std::vector<network::Model>& models_b,
                                                          const Tensor& stimuli,
                                                          const std::vector<std::pair<std::string, std::string>>& layer_pairs,
                                                          RdmMetric metric = RdmMetric::corr);

/// Mean of the strict upper triangle.
double mean_dissimilarity(const Rdm& rdm);

}  // namespace hoconv::analysis
