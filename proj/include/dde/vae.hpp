#pragma once

// Minimal variational autoencoder with hand-written backpropagation.
//
//   encoder:  x --W1,tanh--> h1 --W_mu--> mu
//                               --W_lv--> logvar
//   sample:   z = mu + exp(logvar / 2) * eps,  eps ~ N(0, I)
//   decoder:  z --W3,tanh--> h2 --W4,logistic--> x_hat in (0, 1)^n
//
//   loss(x) = ||x - x_hat||^2 + 0.5 * sum(mu^2 + exp(logvar) - 1 - logvar)
//
// Weights are stored input-major (W[in x out], row-major) in one flat buffer so
// the optimizer can update every parameter with a single kernel call. The
// decoder half, saved on its own, is the learned encoding used downstream.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "dde/arm.hpp"
#include "dde/rng.hpp"

namespace dde {

struct VaeShape {
    std::size_t input_dim = 0;
    std::size_t latent_dim = 0;
    std::size_t hidden_dim = 128;
    friend bool operator==(const VaeShape&, const VaeShape&) = default;
};

struct TrainOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_size = 32;
    double kl_weight = 1.0;
};

struct LossTerms {
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
};

struct TrainReport {
    std::size_t epochs = 0;
    double initial_loss = 0.0;  // dataset mean at the posterior mean, before training
    double final_loss = 0.0;    // same measure after training
    double recon_term = 0.0;    // final-epoch training means
    double kl_term = 0.0;
};

struct Encoded {
    std::vector<double> mu;
    std::vector<double> logvar;
};

// Cached forward pass of a single sample.
struct ForwardPass {
    std::vector<double> h1, mu, logvar, eps, z, h2, x_hat;
    LossTerms loss;
};

double kl_standard_normal(std::span<const double> mu, std::span<const double> logvar);

class Decoder;

class VaeModel {
public:
    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
    VaeModel(VaeShape shape, std::uint64_t init_seed);
    static VaeModel zeros(VaeShape shape);

    const VaeShape& shape() const { return shape_; }
    std::size_t input_dim() const { return shape_.input_dim; }
    std::size_t latent_dim() const { return shape_.latent_dim; }
    std::size_t hidden_dim() const { return shape_.hidden_dim; }

    std::span<const double> params() const { return params_; }
    std::span<double> params() { return params_; }
    std::size_t param_count() const { return params_.size(); }

    Encoded encode(std::span<const double> x) const;
    Genome decode(std::span<const double> z) const;
    // decode(encode(x).mu)
    Genome reconstruct(std::span<const double> x) const;
    Decoder decoder() const;

    ForwardPass forward(std::span<const double> x, std::span<const double> eps, double kl_weight = 1.0) const;
    // Draws eps ~ N(0, I) from rng.
    ForwardPass loss(std::span<const double> x, Rng& rng) const;
    // Loss with z = mu (no sampling).
    LossTerms mean_loss(std::span<const double> x) const;

    // Analytic gradient of the single-sample loss for a fixed eps; grad has
    // param_count() entries and is overwritten.
    LossTerms gradient(std::span<const double> x, std::span<const double> eps, std::span<double> grad,
                       double kl_weight = 1.0) const;

    // Mini-batch Adam over a shuffled copy of the dataset. The optimizer state
    // persists across calls, so repeated calls continue training.
    TrainReport train(const std::vector<Genome>& dataset, std::size_t epochs, Rng& rng,
                      const TrainOptions& opts = {});

    friend bool operator==(const VaeModel& a, const VaeModel& b) {
        return a.shape_ == b.shape_ && a.params_ == b.params_;
    }

private:
    explicit VaeModel(VaeShape shape);

    struct Layout {
        std::size_t w1, b1, wmu, bmu, wlv, blv, w3, b3, w4, b4, total;
    };
    static Layout layout_for(const VaeShape& s);

    VaeShape shape_;
    Layout layout_{};
    std::vector<double> params_;
    std::vector<double> adam_m_, adam_v_;
    std::uint64_t adam_steps_ = 0;

    friend struct VaeBatch;
};

// Max relative error between analytic and central-difference gradients (five-point stencil, per loss term) over
// every parameter: |a - n| / max(1e-8, |a| + |n|). eps is the fixed
// reparameterization draw. corrupt (test hook) may alter the analytic gradient
// before comparison.
double gradient_check(const VaeModel& m, std::span<const double> x, std::span<const double> eps,
                      double step, double kl_weight = 1.0,
                      const std::function<void(std::span<double>)>& corrupt = {});

// The decoder half of a VaeModel: z (latent_dim) -> genome (output_dim).
class Decoder {
public:
    Decoder(std::size_t latent_dim, std::size_t hidden_dim, std::size_t output_dim, std::vector<double> params);
    static Decoder zeros(std::size_t latent_dim, std::size_t hidden_dim, std::size_t output_dim);

    std::size_t latent_dim() const { return latent_; }
    std::size_t hidden_dim() const { return hidden_; }
    std::size_t output_dim() const { return output_; }
    std::span<const double> params() const { return params_; }

    Genome decode(std::span<const double> z) const;

    friend bool operator==(const Decoder&, const Decoder&) = default;

private:
    std::size_t latent_, hidden_, output_;
    std::vector<double> params_;  // W3 [d x h], b3 [h], W4 [h x n], b4 [n]
};

// Binary decoder file, little-endian, version 1:
//   0  char[8]  magic "DDEDECOD"
//   8  u32      format version (1)
//  12  u32      latent_dim d
//  16  u32      hidden_dim h
//  20  u32      output_dim n
//  24  u32      hidden activation (0 = tanh; output is always logistic)
//  28  u32      reserved (0)
//  32  f64[]    W3 (d x h, row-major), b3 (h), W4 (h x n), b4 (n)
//  ..  u64      FNV-1a 64 checksum of the f64 payload bytes
void save_decoder(const std::filesystem::path& path, const Decoder& d);
// Throws IoError if unreadable, FormatError naming the field/offset otherwise.
Decoder load_decoder(const std::filesystem::path& path);

}  // namespace dde
