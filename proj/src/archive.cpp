#include "dde/archive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dde/csv.hpp"
#include "dde/errors.hpp"
#include "dde/simd/kernels.hpp"

namespace dde {

std::string_view to_string(CentroidLayout layout) {
    return layout == CentroidLayout::Ring ? "ring" : "lloyd";
}

CentroidLayout parse_layout(std::string_view name) {
    if (name == "ring") return CentroidLayout::Ring;
    if (name == "lloyd") return CentroidLayout::Lloyd;
    throw ConfigError("unknown centroid layout '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// CentroidSet

CentroidSet::CentroidSet(std::vector<Behavior> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("centroid set must not be empty");
    xs_.reserve(points_.size());
    ys_.reserve(points_.size());
    for (const auto& p : points_) {
        xs_.push_back(p.x);
        ys_.push_back(p.y);
    }

    // About two centroids per bucket over [-1, 1]^2.
    grid_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(points_.size() / 2.0))));
    cell_ = 2.0 / static_cast<double>(grid_);

    std::vector<std::size_t> bucket_of(points_.size());
    std::vector<std::size_t> counts(grid_ * grid_, 0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        bucket_of[i] = bucket_coord(points_[i].y) * grid_ + bucket_coord(points_[i].x);
        ++counts[bucket_of[i]];
    }
    offsets_.assign(grid_ * grid_ + 1, 0);
    for (std::size_t b = 0; b < counts.size(); ++b) offsets_[b + 1] = offsets_[b] + counts[b];
    bucket_xs_.resize(points_.size());
    bucket_ys_.resize(points_.size());
    bucket_ids_.resize(points_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < points_.size(); ++i) {  // ascending ids within each bucket
        const std::size_t slot = fill[bucket_of[i]]++;
        bucket_xs_[slot] = points_[i].x;
        bucket_ys_[slot] = points_[i].y;
        bucket_ids_[slot] = i;
    }
}

std::size_t CentroidSet::bucket_coord(double v) const {
    const double t = std::floor((v + 1.0) / cell_);
    if (!(t > 0.0)) return 0;
    return std::min(grid_ - 1, static_cast<std::size_t>(t));
}

std::size_t CentroidSet::nearest_linear(Behavior b) const {
    double best = 0.0;
    return simd::active().argmin_sqdist(b.x, b.y, xs_.data(), ys_.data(), xs_.size(), &best);
}

std::size_t CentroidSet::nearest(Behavior b) const {
    const auto& k = simd::active();
    const auto bx = static_cast<std::ptrdiff_t>(bucket_coord(b.x));
    const auto by = static_cast<std::ptrdiff_t>(bucket_coord(b.y));
    const auto g = static_cast<std::ptrdiff_t>(grid_);

    double best = INFINITY;
    std::size_t arg = points_.size();
    auto scan = [&](std::ptrdiff_t cx, std::ptrdiff_t cy) {
        const std::size_t bucket = static_cast<std::size_t>(cy * g + cx);
        const std::size_t begin = offsets_[bucket];
        const std::size_t n = offsets_[bucket + 1] - begin;
        if (n == 0) return;
        double d2 = 0.0;
        const std::size_t local = k.argmin_sqdist(b.x, b.y, bucket_xs_.data() + begin, bucket_ys_.data() + begin, n, &d2);
        const std::size_t id = bucket_ids_[begin + local];
        if (d2 < best || (d2 == best && id < arg)) {
            best = d2;
            arg = id;
        }
    };

    for (std::ptrdiff_t r = 0; r < g; ++r) {
        const std::ptrdiff_t x0 = bx - r, x1 = bx + r, y0 = by - r, y1 = by + r;
        for (std::ptrdiff_t cy = std::max<std::ptrdiff_t>(y0, 0); cy <= std::min(y1, g - 1); ++cy) {
            for (std::ptrdiff_t cx = std::max<std::ptrdiff_t>(x0, 0); cx <= std::min(x1, g - 1); ++cx) {
                if (r > 0 && cy != y0 && cy != y1 && cx != x0 && cx != x1) continue;  // ring only
                scan(cx, cy);
            }
        }
        // Lower bound on the distance to any centroid outside the searched square.
        double bound = INFINITY;
        if (x0 > 0) bound = std::min(bound, b.x - (-1.0 + static_cast<double>(x0) * cell_));
        if (x1 < g - 1) bound = std::min(bound, (-1.0 + static_cast<double>(x1 + 1) * cell_) - b.x);
        if (y0 > 0) bound = std::min(bound, b.y - (-1.0 + static_cast<double>(y0) * cell_));
        if (y1 < g - 1) bound = std::min(bound, (-1.0 + static_cast<double>(y1 + 1) * cell_) - b.y);
        if (bound == INFINITY) break;
        if (arg != points_.size() && bound > 0.0 && best < bound * bound) break;
    }
    if (arg == points_.size()) return nearest_linear(b);  // non-finite query
    return arg;
}

// ---------------------------------------------------------------------------
// Centroid generation

std::size_t ring_count_for(std::size_t k) {
    // Ring spacing 1/R roughly matches the arc spacing when k ~ pi R^2.
    const double r = std::round(std::sqrt(static_cast<double>(k) / std::numbers::pi));
    return std::max<std::size_t>(1, static_cast<std::size_t>(r));
}

std::vector<std::size_t> ring_allocation(std::size_t k) {
    const std::size_t rings = ring_count_for(k);
    // weights (j - 0.5) sum to rings^2 / 2
    const double total_weight = static_cast<double>(rings) * static_cast<double>(rings) / 2.0;
    std::vector<std::size_t> counts(rings);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < rings; ++j) {
        const double quota = static_cast<double>(k) * (static_cast<double>(j) + 0.5) / total_weight;
        counts[j] = static_cast<std::size_t>(std::floor(quota));
        assigned += counts[j];
        remainders.emplace_back(quota - std::floor(quota), j);
    }
    // Largest remainder, ties to the inner ring.
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < k; ++i, ++assigned) ++counts[remainders[i % rings].second];
    return counts;
}

namespace {

std::vector<Behavior> ring_layout(std::size_t k, std::uint64_t seed) {
    Rng rng = Rng(seed).derive("centroids");
    const auto counts = ring_allocation(k);
    const double rings = static_cast<double>(counts.size());
    std::vector<Behavior> pts;
    pts.reserve(k);
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) continue;
        const double radius = (static_cast<double>(j) + 0.5) / rings;
        const double step = 2.0 * std::numbers::pi / static_cast<double>(counts[j]);
        const double phase = rng.uniform() * step;
        for (std::size_t i = 0; i < counts[j]; ++i) {
            const double a = phase + step * static_cast<double>(i);
            pts.push_back({radius * std::cos(a), radius * std::sin(a)});
        }
    }
    return pts;
}

Behavior sample_disk(Rng& rng) {
    const double r = std::sqrt(rng.uniform());
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    return {r * std::cos(a), r * std::sin(a)};
}

std::vector<Behavior> lloyd_layout(std::size_t k, std::uint64_t seed) {
    constexpr std::size_t kSamplesPerCentroid = 50;
    constexpr int kIterations = 30;
    Rng rng = Rng(seed).derive("centroids-lloyd");
    std::vector<Behavior> samples(k * kSamplesPerCentroid);
    for (auto& s : samples) s = sample_disk(rng);
    std::vector<Behavior> pts(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k));
    for (int it = 0; it < kIterations; ++it) {
        const CentroidSet cs(pts);
        std::vector<Behavior> sum(k);
        std::vector<std::size_t> count(k, 0);
        for (const auto& s : samples) {
            const std::size_t c = cs.nearest(s);
            sum[c].x += s.x;
            sum[c].y += s.y;
            ++count[c];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (count[c]) pts[c] = {sum[c].x / static_cast<double>(count[c]), sum[c].y / static_cast<double>(count[c])};
    }
    return pts;
}

}  // namespace

CentroidSet generate_centroids(std::size_t k, std::uint64_t seed, CentroidLayout layout) {
    if (k == 0) throw std::invalid_argument("generate_centroids: k must be >= 1");
    return CentroidSet(layout == CentroidLayout::Ring ? ring_layout(k, seed) : lloyd_layout(k, seed));
}

// ---------------------------------------------------------------------------
// Archive

Archive::Archive(std::shared_ptr<const CentroidSet> centroids)
    : centroids_(std::move(centroids)), cells_(centroids_->size()) {}

OfferResult Archive::offer(Genome genome, const Evaluation& eval) {
    if (!std::isfinite(eval.behavior.x) || !std::isfinite(eval.behavior.y) || !std::isfinite(eval.fitness))
        return OfferResult::Rejected;
    const std::size_t idx = centroids_->nearest(eval.behavior);
    auto& slot = cells_[idx];
    if (slot && !(eval.fitness > slot->eval.fitness)) return OfferResult::Rejected;
    if (!slot) occupied_.push_back(idx);
    slot = Elite{std::move(genome), eval};
    return OfferResult::Accepted;
}

ArchiveMetrics Archive::metrics() const {
    ArchiveMetrics m;
    m.coverage = static_cast<double>(occupied_.size()) / static_cast<double>(cells_.size());
    m.empty = occupied_.empty();
    if (!m.empty) {
        double sum = 0.0;
        for (std::size_t i : occupied_) sum += cells_[i]->eval.fitness;
        m.mean_fitness = sum / static_cast<double>(occupied_.size());
    }
    return m;
}

ArchiveMetrics metrics(const Archive& a) { return a.metrics(); }

std::size_t Archive::random_cell(Rng& rng) const {
    if (occupied_.empty()) throw EmptyArchiveError();
    return occupied_[rng.index(occupied_.size())];
}

std::vector<Genome> Archive::genomes() const {
    std::vector<Genome> out;
    out.reserve(occupied_.size());
    for (std::size_t i : occupied_) out.push_back(cells_[i]->genome);
    return out;
}

// ---------------------------------------------------------------------------
// Files

void write_centroids_csv(const std::filesystem::path& path, const CentroidSet& cs) {
    csv::Writer w(path, "x,y");
    for (const auto& p : cs.points()) w.row({csv::format(p.x), csv::format(p.y)});
    w.close();
}

CentroidSet read_centroids_csv(const std::filesystem::path& path) {
    const auto t = csv::read_strict(path, {"x", "y"});
    std::vector<Behavior> pts;
    pts.reserve(t.rows.size());
    for (const auto& r : t.rows) pts.push_back({csv::to_double(r[0], "x"), csv::to_double(r[1], "y")});
    if (pts.empty()) throw FormatError(path.string() + ": no centroids");
    return CentroidSet(std::move(pts));
}

void write_archive_csv(const std::filesystem::path& path, const Archive& a) {
    std::size_t dim = 0;
    if (a.filled()) dim = a.cell(a.occupied().front())->genome.size();
    std::string header = "cell,fitness,behavior_x,behavior_y";
    for (std::size_t i = 0; i < dim; ++i) header += ",g_" + std::to_string(i);
    csv::Writer w(path, header);
    for (std::size_t c = 0; c < a.size(); ++c) {
        const auto& slot = a.cell(c);
        if (!slot) continue;
        std::vector<std::string> row{std::to_string(c), csv::format(slot->eval.fitness),
                                     csv::format(slot->eval.behavior.x), csv::format(slot->eval.behavior.y)};
        for (double g : slot->genome) row.push_back(csv::format(g));
        w.row(row);
    }
    w.close();
}

}  // namespace dde
