#pragma once

#include "hetnet/common.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace hetnet {

/// A wireless technology: one frequency band split into equal subbands.
struct Technology {
    int id = 0;
    double center_frequency = 0.0; // Hz
    double total_bandwidth = 0.0;  // Hz
    int num_subbands = 1;

    /// Builds a technology whose total bandwidth is 1% of its center frequency.
    static Technology from_center_frequency(int id, double center_frequency, int num_subbands);

    double subband_bandwidth() const { return total_bandwidth / num_subbands; }

    /// Throws if any field is out of range.
    void validate() const;
};

/// One (technology, subband) pair; the unit of spectrum a hop transmits on.
struct CommResource {
    int technology = 0;
    int subband = 0;

    friend bool operator==(const CommResource&, const CommResource&) = default;
    friend auto operator<=>(const CommResource&, const CommResource&) = default;
};

/// Flat enumeration of every communication resource in technology order,
/// subbands ascending within a technology.
class ResourceSet {
public:
    ResourceSet() = default;
    explicit ResourceSet(std::vector<Technology> technologies);

    const std::vector<Technology>& technologies() const { return technologies_; }
    const Technology& technology(int id) const { return technologies_.at(static_cast<std::size_t>(id)); }
    const Technology& technology_of(const CommResource& r) const { return technology(r.technology); }
    int num_technologies() const { return static_cast<int>(technologies_.size()); }

    int size() const { return static_cast<int>(resources_.size()); }
    const CommResource& operator[](int index) const { return resources_[static_cast<std::size_t>(index)]; }
    const std::vector<CommResource>& all() const { return resources_; }

    /// Position of `r` in the flat enumeration.
    int index_of(const CommResource& r) const;
    bool contains(const CommResource& r) const;

private:
    std::vector<Technology> technologies_;
    std::vector<CommResource> resources_;
    std::vector<int> offsets_;
};

/// Linear power gains |h|^2 per technology, indexed (tx, rx). Gains are flat
/// across the subbands of a technology and reciprocal.
class ChannelTable {
public:
    ChannelTable() = default;
    ChannelTable(int num_nodes, int num_technologies);

    int num_nodes() const { return num_nodes_; }
    int num_technologies() const { return static_cast<int>(gains_.size()); }

    double gain(int technology, NodeId tx, NodeId rx) const { return gains_[static_cast<std::size_t>(technology)](tx, rx); }
    /// Sets both directions.
    void set_gain(int technology, NodeId a, NodeId b, double gain);

    const Eigen::MatrixXd& matrix(int technology) const { return gains_[static_cast<std::size_t>(technology)]; }

    /// Checks positivity, finiteness and reciprocity of every off-diagonal entry.
    void validate() const;

private:
    int num_nodes_ = 0;
    std::vector<Eigen::MatrixXd> gains_;
};

/// Parameters of the log-distance model with lognormal shadowing.
struct SyntheticChannelParams {
    double reference_distance = 1.0;         // d0, m
    double shadow_sigma_db = 6.0;            // lognormal fading spread
    double alpha_intercept = 3.0;            // path-loss exponent at the reference frequency
    double alpha_slope = 0.5;                // per decade of frequency
    double alpha_reference_frequency = 400e6;
    bool fading = true;
};

double path_loss_exponent(double center_frequency, const SyntheticChannelParams& params = {});

/// Deterministic synthetic power gain. The shadowing draw is keyed on the
/// unordered pair of positions, so gain(a, b) == gain(b, a) bit for bit.
double synthetic_gain(const Vec3& tx_pos, const Vec3& rx_pos, const Technology& tech,
                      std::uint64_t fading_seed, const SyntheticChannelParams& params = {});

/// Gain table for every node pair of `positions` under the synthetic model.
ChannelTable synthesize_channel_table(const std::vector<Vec3>& positions, const ResourceSet& resources,
                                      std::uint64_t fading_seed, const SyntheticChannelParams& params = {});

/// Reads a `tech_id,tx,rx,gain_linear` CSV (one header line). Every ordered
/// off-diagonal pair of every technology must be present; diagonal rows are
/// ignored. When `expected_nodes` is set the file must cover exactly that many
/// nodes.
ChannelTable load_gain_grid(const std::filesystem::path& path, std::optional<int> expected_nodes = std::nullopt);

} // namespace hetnet
