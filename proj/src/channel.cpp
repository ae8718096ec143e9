#include "hetnet/channel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace hetnet {

Technology Technology::from_center_frequency(int id, double center_frequency, int num_subbands) {
    Technology t{id, center_frequency, 0.01 * center_frequency, num_subbands};
    t.validate();
    return t;
}

void Technology::validate() const {
    if (id < 0) throw Error("technology id must be non-negative");
    if (!(center_frequency > 0.0) || !std::isfinite(center_frequency))
        throw Error("technology " + std::to_string(id) + ": center frequency must be positive");
    if (!(total_bandwidth > 0.0) || !std::isfinite(total_bandwidth))
        throw Error("technology " + std::to_string(id) + ": bandwidth must be positive");
    if (num_subbands < 1) throw Error("technology " + std::to_string(id) + ": num_subbands must be >= 1");
}

ResourceSet::ResourceSet(std::vector<Technology> technologies) : technologies_(std::move(technologies)) {
    for (std::size_t i = 0; i < technologies_.size(); ++i) {
        technologies_[i].validate();
        if (technologies_[i].id != static_cast<int>(i))
            throw Error("technology ids must be 0..M-1 in order");
        offsets_.push_back(static_cast<int>(resources_.size()));
        for (int s = 0; s < technologies_[i].num_subbands; ++s)
            resources_.push_back({static_cast<int>(i), s});
    }
}

int ResourceSet::index_of(const CommResource& r) const {
    if (!contains(r)) throw Error("unknown communication resource");
    return offsets_[static_cast<std::size_t>(r.technology)] + r.subband;
}

bool ResourceSet::contains(const CommResource& r) const {
    return r.technology >= 0 && r.technology < num_technologies() && r.subband >= 0 &&
           r.subband < technologies_[static_cast<std::size_t>(r.technology)].num_subbands;
}

ChannelTable::ChannelTable(int num_nodes, int num_technologies) : num_nodes_(num_nodes) {
    if (num_nodes < 0 || num_technologies < 0) throw Error("channel table dimensions must be non-negative");
    gains_.assign(static_cast<std::size_t>(num_technologies), Eigen::MatrixXd::Zero(num_nodes, num_nodes));
}

void ChannelTable::set_gain(int technology, NodeId a, NodeId b, double gain) {
    auto& m = gains_.at(static_cast<std::size_t>(technology));
    m(a, b) = gain;
    m(b, a) = gain;
}

void ChannelTable::validate() const {
    for (std::size_t t = 0; t < gains_.size(); ++t) {
        const auto& m = gains_[t];
        for (int a = 0; a < num_nodes_; ++a) {
            for (int b = 0; b < num_nodes_; ++b) {
                if (a == b) continue;
                if (!(m(a, b) > 0.0) || !std::isfinite(m(a, b)))
                    throw Error("non-positive gain for tech " + std::to_string(t) + " pair (" + std::to_string(a) +
                                "," + std::to_string(b) + ")");
                if (m(a, b) != m(b, a))
                    throw Error("non-reciprocal gain for tech " + std::to_string(t) + " pair (" + std::to_string(a) +
                                "," + std::to_string(b) + ")");
            }
        }
    }
}

double path_loss_exponent(double center_frequency, const SyntheticChannelParams& params) {
    return params.alpha_intercept + params.alpha_slope * std::log10(center_frequency / params.alpha_reference_frequency);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_position(const Vec3& p) {
    std::uint64_t h = 0x51ed270b27a1f3c5ULL;
    for (int i = 0; i < 3; ++i) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(p[i] + 0.0));
    return h;
}

// Uniform in (0, 1).
double to_unit(std::uint64_t x) { return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53; }

double shadowing_normal(const Vec3& a, const Vec3& b, int tech_id, std::uint64_t seed) {
    auto ha = hash_position(a);
    auto hb = hash_position(b);
    if (ha > hb) std::swap(ha, hb);
    std::uint64_t key = splitmix64(seed ^ 0x2545f4914f6cdd1dULL);
    key = splitmix64(key ^ ha);
    key = splitmix64(key ^ hb);
    key = splitmix64(key ^ static_cast<std::uint64_t>(tech_id));
    const double u1 = to_unit(key);
    const double u2 = to_unit(splitmix64(key));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

} // namespace

double synthetic_gain(const Vec3& tx_pos, const Vec3& rx_pos, const Technology& tech, std::uint64_t fading_seed,
                      const SyntheticChannelParams& params) {
    const double d = (tx_pos - rx_pos).norm();
    if (!(d > 0.0)) throw Error("coincident nodes");
    const double d0 = params.reference_distance;
    const double fspl = kSpeedOfLight / (4.0 * kPi * tech.center_frequency * d0);
    const double alpha = path_loss_exponent(tech.center_frequency, params);
    double gain = fspl * fspl * std::pow(d0 / d, alpha);
    if (params.fading && params.shadow_sigma_db > 0.0)
        gain *= from_db(params.shadow_sigma_db * shadowing_normal(tx_pos, rx_pos, tech.id, fading_seed));
    return gain;
}

ChannelTable synthesize_channel_table(const std::vector<Vec3>& positions, const ResourceSet& resources,
                                      std::uint64_t fading_seed, const SyntheticChannelParams& params) {
    const int n = static_cast<int>(positions.size());
    ChannelTable table(n, resources.num_technologies());
    for (const auto& tech : resources.technologies())
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                table.set_gain(tech.id, a, b,
                               synthetic_gain(positions[static_cast<std::size_t>(a)],
                                              positions[static_cast<std::size_t>(b)], tech, fading_seed, params));
    return table;
}

ChannelTable load_gain_grid(const std::filesystem::path& path, std::optional<int> expected_nodes) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open gain grid: " + path.string());

    std::map<std::tuple<int, int, int>, double> entries;
    std::string line;
    int line_no = 0;
    int max_node = -1;
    int max_tech = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) continue; // header
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        auto malformed = [&] { return Error("malformed row at line " + std::to_string(line_no) + ": " + line); };
        if (fields.size() != 4) throw malformed();

        int tech = 0, tx = 0, rx = 0;
        double gain = 0.0;
        try {
            auto parse_int = [&](const std::string& f) {
                std::size_t used = 0;
                const int v = std::stoi(f, &used);
                if (f.find_first_not_of(" \t", used) != std::string::npos) throw malformed();
                return v;
            };
            tech = parse_int(fields[0]);
            tx = parse_int(fields[1]);
            rx = parse_int(fields[2]);
            std::size_t used = 0;
            gain = std::stod(fields[3], &used);
            if (fields[3].find_first_not_of(" \t", used) != std::string::npos) throw malformed();
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw malformed();
        }
        if (tech < 0 || tx < 0 || rx < 0) throw malformed();
        if (tx == rx) continue;
        if (!(gain > 0.0) || !std::isfinite(gain))
            throw Error("non-positive gain at line " + std::to_string(line_no));
        if (!entries.emplace(std::tuple{tech, tx, rx}, gain).second)
            throw Error("duplicate entry at line " + std::to_string(line_no));
        max_node = std::max({max_node, tx, rx});
        max_tech = std::max(max_tech, tech);
    }

    const int nodes = max_node + 1;
    if (expected_nodes && *expected_nodes != nodes)
        throw Error("node-count mismatch: grid covers " + std::to_string(nodes) + " nodes, expected " +
                    std::to_string(*expected_nodes));
    if (nodes < 2 || max_tech < 0) throw Error("incomplete matrix: gain grid is empty");

    ChannelTable table(nodes, max_tech + 1);
    auto lookup = [&](int t, int a, int b) {
        auto it = entries.find({t, a, b});
        if (it == entries.end())
            throw Error("incomplete matrix: missing tech " + std::to_string(t) + " pair (" + std::to_string(a) + "," +
                        std::to_string(b) + ")");
        return it->second;
    };
    for (int t = 0; t <= max_tech; ++t) {
        for (int a = 0; a < nodes; ++a) {
            for (int b = a + 1; b < nodes; ++b) {
                const double forward = lookup(t, a, b);
                if (forward != lookup(t, b, a))
                    throw Error("non-reciprocal gain for tech " + std::to_string(t) + " pair (" + std::to_string(a) +
                                "," + std::to_string(b) + ")");
                table.set_gain(t, a, b, forward);
            }
        }
    }
    table.validate();
    return table;
}

} // namespace hetnet
