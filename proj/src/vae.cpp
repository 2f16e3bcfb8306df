#include "dde/vae.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dde/errors.hpp"
#include "dde/simd/kernels.hpp"

namespace dde {

static_assert(std::endian::native == std::endian::little, "decoder files assume a little-endian host");

namespace {

inline double logistic(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// rows x cols buffer initialised with the bias broadcast to every row
void fill_bias(std::vector<double>& buf, std::size_t rows, const double* bias, std::size_t cols) {
    buf.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) std::copy(bias, bias + cols, buf.begin() + static_cast<std::ptrdiff_t>(r * cols));
}

void add_column_sums(const std::vector<double>& d, std::size_t rows, std::size_t cols, double* out) {
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[c] += d[r * cols + c];
}

// Shared by VaeModel and Decoder so both produce bit-identical outputs.
void decode_rows(const double* w3, const double* b3, const double* w4, const double* b4, std::size_t d,
                 std::size_t h, std::size_t n, std::size_t rows, const double* z, std::vector<double>& h2,
                 std::vector<double>& x_hat) {
    const auto& k = simd::active();
    fill_bias(h2, rows, b3, h);
    k.gemm_nn(rows, d, h, z, w3, h2.data());
    for (double& v : h2) v = std::tanh(v);
    fill_bias(x_hat, rows, b4, n);
    k.gemm_nn(rows, h, n, h2.data(), w4, x_hat.data());
    for (double& v : x_hat) v = logistic(v);
}

}  // namespace

double kl_standard_normal(std::span<const double> mu, std::span<const double> logvar) {
    double kl = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        kl += mu[i] * mu[i] + (std::expm1(logvar[i]) - logvar[i]);
    return 0.5 * kl;
}

// ---------------------------------------------------------------------------
// Batched forward/backward workspace

struct VaeBatch {
    const VaeModel& m;
    std::size_t rows = 0;
    std::vector<double> x, eps, h1, mu, lv, z, h2, xh;
    std::vector<double> d_out, d_h2, d_z, d_mu, d_lv, d_h1;

    explicit VaeBatch(const VaeModel& model) : m(model) {}

    const double* p(std::size_t off) const { return m.params_.data() + off; }

    void encode() {
        const auto& s = m.shape_;
        const auto& L = m.layout_;
        const auto& k = simd::active();
        fill_bias(h1, rows, p(L.b1), s.hidden_dim);
        k.gemm_nn(rows, s.input_dim, s.hidden_dim, x.data(), p(L.w1), h1.data());
        for (double& v : h1) v = std::tanh(v);
        fill_bias(mu, rows, p(L.bmu), s.latent_dim);
        k.gemm_nn(rows, s.hidden_dim, s.latent_dim, h1.data(), p(L.wmu), mu.data());
        fill_bias(lv, rows, p(L.blv), s.latent_dim);
        k.gemm_nn(rows, s.hidden_dim, s.latent_dim, h1.data(), p(L.wlv), lv.data());
    }

    // eps must hold rows x latent draws; a null eps uses z = mu.
    void forward(bool sample) {
        encode();
        const auto& s = m.shape_;
        const auto& L = m.layout_;
        z.resize(rows * s.latent_dim);
        for (std::size_t i = 0; i < z.size(); ++i)
            z[i] = sample ? mu[i] + std::exp(0.5 * lv[i]) * eps[i] : mu[i];
        decode_rows(p(L.w3), p(L.b3), p(L.w4), p(L.b4), s.latent_dim, s.hidden_dim, s.input_dim, rows, z.data(),
                    h2, xh);
    }

    LossTerms row_loss(std::size_t r, double kl_weight) const {
        const auto& s = m.shape_;
        LossTerms t;
        for (std::size_t j = 0; j < s.input_dim; ++j) {
            const double e = x[r * s.input_dim + j] - xh[r * s.input_dim + j];
            t.recon += e * e;
        }
        t.kl = kl_standard_normal({mu.data() + r * s.latent_dim, s.latent_dim},
                                  {lv.data() + r * s.latent_dim, s.latent_dim});
        t.total = t.recon + kl_weight * t.kl;
        return t;
    }

    // Accumulates scale * d(sum of row losses)/d(params) into grad.
    void backward(double scale, double kl_weight, double* grad) {
        const auto& s = m.shape_;
        const auto& L = m.layout_;
        const auto& k = simd::active();
        const std::size_t n = s.input_dim, h = s.hidden_dim, d = s.latent_dim;

        d_out.resize(rows * n);
        for (std::size_t i = 0; i < d_out.size(); ++i) {
            const double y = xh[i];
            d_out[i] = scale * 2.0 * (y - x[i]) * y * (1.0 - y);
        }
        k.gemm_tn(rows, h, n, h2.data(), d_out.data(), grad + L.w4);
        add_column_sums(d_out, rows, n, grad + L.b4);

        d_h2.assign(rows * h, 0.0);
        k.gemm_nt(rows, h, n, d_out.data(), p(L.w4), d_h2.data());
        for (std::size_t i = 0; i < d_h2.size(); ++i) d_h2[i] *= 1.0 - h2[i] * h2[i];
        k.gemm_tn(rows, d, h, z.data(), d_h2.data(), grad + L.w3);
        add_column_sums(d_h2, rows, h, grad + L.b3);

        d_z.assign(rows * d, 0.0);
        k.gemm_nt(rows, d, h, d_h2.data(), p(L.w3), d_z.data());

        d_mu.resize(rows * d);
        d_lv.resize(rows * d);
        const double kl_scale = scale * kl_weight;
        for (std::size_t i = 0; i < rows * d; ++i) {
            const double sigma = std::exp(0.5 * lv[i]);
            d_mu[i] = d_z[i] + kl_scale * mu[i];
            d_lv[i] = d_z[i] * eps[i] * 0.5 * sigma + kl_scale * 0.5 * std::expm1(lv[i]);
        }
        k.gemm_tn(rows, h, d, h1.data(), d_mu.data(), grad + L.wmu);
        add_column_sums(d_mu, rows, d, grad + L.bmu);
        k.gemm_tn(rows, h, d, h1.data(), d_lv.data(), grad + L.wlv);
        add_column_sums(d_lv, rows, d, grad + L.blv);

        d_h1.assign(rows * h, 0.0);
        k.gemm_nt(rows, h, d, d_mu.data(), p(L.wmu), d_h1.data());
        k.gemm_nt(rows, h, d, d_lv.data(), p(L.wlv), d_h1.data());
        for (std::size_t i = 0; i < d_h1.size(); ++i) d_h1[i] *= 1.0 - h1[i] * h1[i];
        k.gemm_tn(rows, n, h, x.data(), d_h1.data(), grad + L.w1);
        add_column_sums(d_h1, rows, h, grad + L.b1);
    }
};

// ---------------------------------------------------------------------------
// VaeModel

VaeModel::Layout VaeModel::layout_for(const VaeShape& s) {
    Layout L{};
    std::size_t off = 0;
    auto take = [&](std::size_t n) {
        const std::size_t at = off;
        off += n;
        return at;
    };
    const std::size_t n = s.input_dim, h = s.hidden_dim, d = s.latent_dim;
    L.w1 = take(n * h);
    L.b1 = take(h);
    L.wmu = take(h * d);
    L.bmu = take(d);
    L.wlv = take(h * d);
    L.blv = take(d);
    L.w3 = take(d * h);
    L.b3 = take(h);
    L.w4 = take(h * n);
    L.b4 = take(n);
    L.total = off;
    return L;
}

VaeModel::VaeModel(VaeShape shape) : shape_(shape) {
    if (shape.input_dim == 0 || shape.latent_dim == 0 || shape.hidden_dim == 0)
        throw std::invalid_argument("VAE dimensions must be positive");
    layout_ = layout_for(shape_);
    params_.assign(layout_.total, 0.0);
    adam_m_.assign(layout_.total, 0.0);
    adam_v_.assign(layout_.total, 0.0);
}

VaeModel VaeModel::zeros(VaeShape shape) { return VaeModel(shape); }

VaeModel::VaeModel(VaeShape shape, std::uint64_t init_seed) : VaeModel(shape) {
    Rng rng = Rng(init_seed).derive("vae-init");
    auto init = [&](std::size_t off, std::size_t fan_in, std::size_t count) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) params_[off + i] = (2.0 * rng.uniform() - 1.0) * bound;
    };
    const std::size_t n = shape_.input_dim, h = shape_.hidden_dim, d = shape_.latent_dim;
    init(layout_.w1, n, n * h);
    init(layout_.wmu, h, h * d);
    init(layout_.wlv, h, h * d);
    init(layout_.w3, d, d * h);
    init(layout_.w4, h, h * n);
}

Encoded VaeModel::encode(std::span<const double> x) const {
    require_dims(x.size(), shape_.input_dim, "VAE encode input");
    VaeBatch b(*this);
    b.rows = 1;
    b.x.assign(x.begin(), x.end());
    b.encode();
    return {std::move(b.mu), std::move(b.lv)};
}

Genome VaeModel::decode(std::span<const double> z) const {
    require_dims(z.size(), shape_.latent_dim, "VAE decode input");
    std::vector<double> h2, out;
    decode_rows(params_.data() + layout_.w3, params_.data() + layout_.b3, params_.data() + layout_.w4,
                params_.data() + layout_.b4, shape_.latent_dim, shape_.hidden_dim, shape_.input_dim, 1, z.data(),
                h2, out);
    return out;
}

Genome VaeModel::reconstruct(std::span<const double> x) const { return decode(encode(x).mu); }

Decoder VaeModel::decoder() const {
    const auto first = params_.begin() + static_cast<std::ptrdiff_t>(layout_.w3);
    return Decoder(shape_.latent_dim, shape_.hidden_dim, shape_.input_dim,
                   std::vector<double>(first, params_.begin() + static_cast<std::ptrdiff_t>(layout_.total)));
}

ForwardPass VaeModel::forward(std::span<const double> x, std::span<const double> eps, double kl_weight) const {
    require_dims(x.size(), shape_.input_dim, "VAE input");
    require_dims(eps.size(), shape_.latent_dim, "VAE noise");
    VaeBatch b(*this);
    b.rows = 1;
    b.x.assign(x.begin(), x.end());
    b.eps.assign(eps.begin(), eps.end());
    b.forward(true);
    ForwardPass f;
    f.loss = b.row_loss(0, kl_weight);
    f.h1 = std::move(b.h1);
    f.mu = std::move(b.mu);
    f.logvar = std::move(b.lv);
    f.eps = std::move(b.eps);
    f.z = std::move(b.z);
    f.h2 = std::move(b.h2);
    f.x_hat = std::move(b.xh);
    return f;
}

ForwardPass VaeModel::loss(std::span<const double> x, Rng& rng) const {
    std::vector<double> eps(shape_.latent_dim);
    for (double& e : eps) e = rng.normal();
    return forward(x, eps);
}

LossTerms VaeModel::mean_loss(std::span<const double> x) const {
    require_dims(x.size(), shape_.input_dim, "VAE input");
    VaeBatch b(*this);
    b.rows = 1;
    b.x.assign(x.begin(), x.end());
    b.forward(false);
    return b.row_loss(0, 1.0);
}

LossTerms VaeModel::gradient(std::span<const double> x, std::span<const double> eps, std::span<double> grad,
                             double kl_weight) const {
    require_dims(x.size(), shape_.input_dim, "VAE input");
    require_dims(eps.size(), shape_.latent_dim, "VAE noise");
    require_dims(grad.size(), params_.size(), "VAE gradient buffer");
    VaeBatch b(*this);
    b.rows = 1;
    b.x.assign(x.begin(), x.end());
    b.eps.assign(eps.begin(), eps.end());
    b.forward(true);
    std::fill(grad.begin(), grad.end(), 0.0);
    b.backward(1.0, kl_weight, grad.data());
    return b.row_loss(0, kl_weight);
}

namespace {

double dataset_mean_loss(const VaeModel& m, const std::vector<Genome>& data) {
    double sum = 0.0;
    for (const auto& g : data) sum += m.mean_loss(g).total;
    return sum / static_cast<double>(data.size());
}

}  // namespace

TrainReport VaeModel::train(const std::vector<Genome>& dataset, std::size_t epochs, Rng& rng,
                            const TrainOptions& opts) {
    if (dataset.empty()) throw std::invalid_argument("VAE train: empty dataset");
    for (const auto& g : dataset) require_dims(g.size(), shape_.input_dim, "VAE training sample");

    TrainReport report;
    report.epochs = epochs;
    report.initial_loss = dataset_mean_loss(*this, dataset);

    const std::size_t n = shape_.input_dim, d = shape_.latent_dim;
    const std::size_t batch = std::max<std::size_t>(1, std::min(opts.batch_size, dataset.size()));
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad(params_.size());
    VaeBatch b(*this);
    const auto& k = simd::active();

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        double recon_sum = 0.0, kl_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            b.rows = std::min(batch, order.size() - start);
            b.x.resize(b.rows * n);
            for (std::size_t r = 0; r < b.rows; ++r)
                std::copy(dataset[order[start + r]].begin(), dataset[order[start + r]].end(),
                          b.x.begin() + static_cast<std::ptrdiff_t>(r * n));
            b.eps.resize(b.rows * d);
            for (double& e : b.eps) e = rng.normal();
            b.forward(true);
            for (std::size_t r = 0; r < b.rows; ++r) {
                const auto t = b.row_loss(r, opts.kl_weight);
                recon_sum += t.recon;
                kl_sum += t.kl;
            }
            std::fill(grad.begin(), grad.end(), 0.0);
            b.backward(1.0 / static_cast<double>(b.rows), opts.kl_weight, grad.data());

            ++adam_steps_;
            const double t = static_cast<double>(adam_steps_);
            simd::AdamCoeffs c{};
            c.beta1 = opts.beta1;
            c.beta2 = opts.beta2;
            c.step = opts.learning_rate / (1.0 - std::pow(opts.beta1, t));
            c.inv_sqrt_bc2 = 1.0 / std::sqrt(1.0 - std::pow(opts.beta2, t));
            c.eps = opts.adam_eps;
            k.adam_step(params_.data(), adam_m_.data(), adam_v_.data(), grad.data(), params_.size(), c);
        }
        report.recon_term = recon_sum / static_cast<double>(dataset.size());
        report.kl_term = kl_sum / static_cast<double>(dataset.size());
    }

    if (epochs == 0) {
        double recon = 0.0, kl = 0.0;
        for (const auto& g : dataset) {
            const auto t = mean_loss(g);
            recon += t.recon;
            kl += t.kl;
        }
        report.recon_term = recon / static_cast<double>(dataset.size());
        report.kl_term = kl / static_cast<double>(dataset.size());
        report.final_loss = report.initial_loss;
    } else {
        report.final_loss = dataset_mean_loss(*this, dataset);
    }
    return report;
}

double gradient_check(const VaeModel& m, std::span<const double> x, std::span<const double> eps, double step,
                      double kl_weight, const std::function<void(std::span<double>)>& corrupt) {
    if (!(step >= 1e-7 && step <= 1e-3)) throw std::invalid_argument("gradient_check: step must be in [1e-7, 1e-3]");
    std::vector<double> analytic(m.param_count());
    m.gradient(x, eps, analytic, kl_weight);
    if (corrupt) corrupt(analytic);

    VaeModel probe = m;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.param_count(); ++i) {
        const double saved = probe.params()[i];
        auto at = [&](double offset) {
            probe.params()[i] = saved + offset;
            return probe.forward(x, eps, kl_weight).loss;
        };
        const LossTerms p1 = at(step), m1 = at(-step), p2 = at(2.0 * step), m2 = at(-2.0 * step);
        probe.params()[i] = saved;
        // Fourth-order central stencil, applied per loss term.
        auto stencil = [&](double f_p1, double f_m1, double f_p2, double f_m2) {
            return (8.0 * (f_p1 - f_m1) - (f_p2 - f_m2)) / (12.0 * step);
        };
        const double numeric =
            stencil(p1.recon, m1.recon, p2.recon, m2.recon) + kl_weight * stencil(p1.kl, m1.kl, p2.kl, m2.kl);
        const double err =
            std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Decoder

Decoder::Decoder(std::size_t latent_dim, std::size_t hidden_dim, std::size_t output_dim, std::vector<double> params)
    : latent_(latent_dim), hidden_(hidden_dim), output_(output_dim), params_(std::move(params)) {
    if (latent_ == 0 || hidden_ == 0 || output_ == 0) throw std::invalid_argument("decoder dimensions must be positive");
    require_dims(params_.size(), latent_ * hidden_ + hidden_ + hidden_ * output_ + output_, "decoder parameters");
}

Decoder Decoder::zeros(std::size_t latent_dim, std::size_t hidden_dim, std::size_t output_dim) {
    return Decoder(latent_dim, hidden_dim, output_dim,
                   std::vector<double>(latent_dim * hidden_dim + hidden_dim + hidden_dim * output_dim + output_dim));
}

Genome Decoder::decode(std::span<const double> z) const {
    require_dims(z.size(), latent_, "decoder input");
    const double* w3 = params_.data();
    const double* b3 = w3 + latent_ * hidden_;
    const double* w4 = b3 + hidden_;
    const double* b4 = w4 + hidden_ * output_;
    std::vector<double> h2, out;
    decode_rows(w3, b3, w4, b4, latent_, hidden_, output_, 1, z.data(), h2, out);
    return out;
}

namespace {

constexpr char kMagic[8] = {'D', 'D', 'E', 'D', 'E', 'C', 'O', 'D'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 32;

std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ull;
    }
    return h;
}

template <class T>
void put(std::vector<unsigned char>& buf, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <class T>
T get(const std::vector<unsigned char>& buf, std::size_t offset) {
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    return v;
}

}  // namespace

void save_decoder(const std::filesystem::path& path, const Decoder& d) {
    std::vector<unsigned char> buf(kMagic, kMagic + 8);
    put<std::uint32_t>(buf, kVersion);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(d.latent_dim()));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(d.hidden_dim()));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(d.output_dim()));
    put<std::uint32_t>(buf, 0);  // tanh
    put<std::uint32_t>(buf, 0);
    for (double v : d.params()) put<double>(buf, v);
    put<std::uint64_t>(buf, fnv1a(buf.data() + kHeaderBytes, buf.size() - kHeaderBytes));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Decoder load_decoder(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open decoder file '" + path.string() + "'");
    const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string where = path.string() + ": ";
    if (buf.size() < kHeaderBytes) throw FormatError(where + "truncated header (" + std::to_string(buf.size()) + " bytes)");
    if (std::memcmp(buf.data(), kMagic, 8) != 0) throw FormatError(where + "bad magic at offset 0");
    if (const auto v = get<std::uint32_t>(buf, 8); v != kVersion)
        throw FormatError(where + "unsupported version " + std::to_string(v) + " at offset 8");
    const std::size_t d = get<std::uint32_t>(buf, 12);
    const std::size_t h = get<std::uint32_t>(buf, 16);
    const std::size_t n = get<std::uint32_t>(buf, 20);
    if (d == 0) throw FormatError(where + "latent_dim (offset 12) is zero");
    if (h == 0) throw FormatError(where + "hidden_dim (offset 16) is zero");
    if (n == 0) throw FormatError(where + "output_dim (offset 20) is zero");
    if (const auto act = get<std::uint32_t>(buf, 24); act != 0)
        throw FormatError(where + "unknown activation " + std::to_string(act) + " at offset 24");
    const std::size_t count = d * h + h + h * n + n;
    const std::size_t expected = kHeaderBytes + count * sizeof(double) + sizeof(std::uint64_t);
    if (buf.size() != expected)
        throw FormatError(where + "payload size " + std::to_string(buf.size()) + " bytes, expected " +
                          std::to_string(expected) + " for dims (" + std::to_string(d) + ", " + std::to_string(h) +
                          ", " + std::to_string(n) + ")");
    const std::size_t checksum_at = expected - sizeof(std::uint64_t);
    if (get<std::uint64_t>(buf, checksum_at) != fnv1a(buf.data() + kHeaderBytes, checksum_at - kHeaderBytes))
        throw FormatError(where + "checksum mismatch at offset " + std::to_string(checksum_at));
    std::vector<double> params(count);
    std::memcpy(params.data(), buf.data() + kHeaderBytes, count * sizeof(double));
    return Decoder(d, h, n, std::move(params));
}

}  // namespace dde
