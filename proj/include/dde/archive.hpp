#pragma once

// Centroidal-Voronoi MAP-Elites archive over the unit disk.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dde/arm.hpp"
#include "dde/rng.hpp"

namespace dde {

enum class CentroidLayout { Ring, Lloyd };

std::string_view to_string(CentroidLayout layout);
CentroidLayout parse_layout(std::string_view name);

// Fixed set of niche centres with a uniform-grid lookup for nearest-centroid
// queries. Immutable once built.
class CentroidSet {
public:
    explicit CentroidSet(std::vector<Behavior> points);

    std::size_t size() const { return points_.size(); }
    const std::vector<Behavior>& points() const { return points_; }
    const Behavior& operator[](std::size_t i) const { return points_[i]; }

    // Argmin of Euclidean distance, ties to the lowest index.
    std::size_t nearest(Behavior b) const;
    // Reference linear scan over all centroids (same tie rule).
    std::size_t nearest_linear(Behavior b) const;

private:
    std::size_t bucket_coord(double v) const;

    std::vector<Behavior> points_;
    std::vector<double> xs_, ys_;  // SoA copy, index order

    std::size_t grid_ = 1;
    double cell_ = 2.0;
    // Bucket-sorted SoA copies; bucket b spans [offsets_[b], offsets_[b + 1]).
    std::vector<std::size_t> offsets_;
    std::vector<double> bucket_xs_, bucket_ys_;
    std::vector<std::size_t> bucket_ids_;
};

// Number of rings used for k centroids and the per-ring allocation.
std::size_t ring_count_for(std::size_t k);
std::vector<std::size_t> ring_allocation(std::size_t k);

// Throws std::invalid_argument for k == 0.
CentroidSet generate_centroids(std::size_t k, std::uint64_t seed, CentroidLayout layout = CentroidLayout::Ring);

inline std::size_t nearest_centroid(Behavior b, const CentroidSet& cs) { return cs.nearest(b); }

struct Elite {
    Genome genome;
    Evaluation eval;
};

enum class OfferResult { Accepted, Rejected };

struct ArchiveMetrics {
    double coverage = 0.0;
    double mean_fitness = 0.0;  // 0 when empty
    bool empty = true;
};

class Archive {
public:
    explicit Archive(std::shared_ptr<const CentroidSet> centroids);

    // Inserts when the target cell is empty or the challenger is strictly
    // fitter. Non-finite behaviors or fitness are rejected.
    OfferResult offer(Genome genome, const Evaluation& eval);

    std::size_t size() const { return cells_.size(); }
    std::size_t filled() const { return occupied_.size(); }
    const std::optional<Elite>& cell(std::size_t i) const { return cells_[i]; }
    // Occupied cell indices in first-insertion order.
    const std::vector<std::size_t>& occupied() const { return occupied_; }
    const CentroidSet& centroids() const { return *centroids_; }
    const std::shared_ptr<const CentroidSet>& centroids_ptr() const { return centroids_; }

    ArchiveMetrics metrics() const;

    // Uniform over occupied cells. Throws EmptyArchiveError.
    std::size_t random_cell(Rng& rng) const;
    const Elite& random_elite(Rng& rng) const { return *cells_[random_cell(rng)]; }

    // Genomes of all elites, in first-insertion order of their cells.
    std::vector<Genome> genomes() const;

private:
    std::shared_ptr<const CentroidSet> centroids_;
    std::vector<std::optional<Elite>> cells_;
    std::vector<std::size_t> occupied_;
};

ArchiveMetrics metrics(const Archive& a);

// CSV files: centroids as `x,y`; archives as
// `cell,fitness,behavior_x,behavior_y,g_0,...,g_{n-1}` sorted by cell.
void write_centroids_csv(const std::filesystem::path& path, const CentroidSet& cs);
CentroidSet read_centroids_csv(const std::filesystem::path& path);
void write_archive_csv(const std::filesystem::path& path, const Archive& a);

}  // namespace dde
