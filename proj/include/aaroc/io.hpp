#ifndef AAROC_IO_HPP
#define AAROC_IO_HPP

// Persistence: snapshot and reduced-model binary formats, atomic file
// writes, CSV formatting and the canonical config hash.

#include <openssl/evp.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "aaroc/greedy.hpp"
#include "aaroc/rom.hpp"

namespace aaroc {

constexpr char kSnapshotMagic[8] = {'A', 'A', 'R', 'O', 'C', 'S', 'N', 'P'};
constexpr char kModelMagic[8] = {'A', 'A', 'R', 'O', 'C', 'R', 'O', 'M'};
constexpr uint32_t kFormatVersion = 1;

namespace detail {

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ArtifactVersionMismatch("unexpected end of file");
    return v;
}

inline void write_matrix(std::ostream& os, const Mat& m) {
    write_pod<uint64_t>(os, static_cast<uint64_t>(m.rows()));
    write_pod<uint64_t>(os, static_cast<uint64_t>(m.cols()));
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
}

inline Mat read_matrix(std::istream& is) {
    const auto rows = read_pod<uint64_t>(is);
    const auto cols = read_pod<uint64_t>(is);
    Mat m(static_cast<Index>(rows), static_cast<Index>(cols));
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    if (!is) throw ArtifactVersionMismatch("truncated matrix block");
    return m;
}

inline void write_indices(std::ostream& os, const IndexList& v) {
    write_pod<uint64_t>(os, v.size());
    for (Index x : v) write_pod<uint64_t>(os, static_cast<uint64_t>(x));
}

inline IndexList read_indices(std::istream& is) {
    const auto n = read_pod<uint64_t>(is);
    IndexList v(n);
    for (auto& x : v) x = static_cast<Index>(read_pod<uint64_t>(is));
    return v;
}

inline void write_longs(std::ostream& os, const std::vector<long>& v) {
    write_pod<uint64_t>(os, v.size());
    for (long x : v) write_pod<int64_t>(os, x);
}

inline std::vector<long> read_longs(std::istream& is) {
    const auto n = read_pod<uint64_t>(is);
    std::vector<long> v(n);
    for (auto& x : v) x = static_cast<long>(read_pod<int64_t>(is));
    return v;
}

inline void write_param(std::ostream& os, const Parameter& p) {
    write_pod<uint64_t>(os, static_cast<uint64_t>(p.size()));
    for (Index i = 0; i < p.size(); ++i) write_pod<double>(os, p[i]);
}

inline Parameter read_param(std::istream& is) {
    const auto n = read_pod<uint64_t>(is);
    Parameter p(static_cast<Index>(n));
    for (Index i = 0; i < p.size(); ++i) p[i] = read_pod<double>(is);
    return p;
}

} // namespace detail

// Write temp + rename, so interrupted runs never leave truncated files.
inline void atomic_write(const std::filesystem::path& path,
                         const std::function<void(std::ostream&)>& writer) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        writer(os);
        if (!os) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

// Shortest round-trip double formatting, locale-independent.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Snapshot binary format

inline void write_snapshot(std::ostream& os, const SnapshotMatrix& snaps) {
    os.write(kSnapshotMagic, 8);
    detail::write_pod<uint32_t>(os, kFormatVersion);
    detail::write_matrix(os, snaps);
}

inline void save_snapshot(const std::filesystem::path& path, const SnapshotMatrix& snaps) {
    atomic_write(path, [&](std::ostream& os) { write_snapshot(os, snaps); });
}

inline SnapshotMatrix read_snapshot(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != std::string(kSnapshotMagic, 8))
        throw ArtifactVersionMismatch("bad snapshot magic bytes");
    if (detail::read_pod<uint32_t>(is) != kFormatVersion)
        throw ArtifactVersionMismatch("unsupported snapshot format version");
    return detail::read_matrix(is);
}

inline SnapshotMatrix load_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return read_snapshot(is);
}

// ---------------------------------------------------------------------------
// Reduced-model / offline-artifact binary format. The config JSON rides
// in front of the model payload so the online stage can rebuild the
// full-order problem.

inline void write_artifact(std::ostream& os, const OfflineArtifact& artifact,
                           const std::string& config_json) {
    os.write(kModelMagic, 8);
    detail::write_pod<uint32_t>(os, kFormatVersion);
    detail::write_pod<uint64_t>(os, config_json.size());
    os.write(config_json.data(), static_cast<std::streamsize>(config_json.size()));

    const ReducedModel& m = artifact.model;
    detail::write_matrix(os, m.basis.V);
    detail::write_matrix(os, m.basis.R);
    detail::write_pod<uint64_t>(os, m.basis.provenance.size());
    for (const auto& prov : m.basis.provenance) {
        detail::write_pod<int64_t>(os, prov.time_index);
        detail::write_param(os, prov.mu);
    }
    detail::write_pod<uint64_t>(os, static_cast<uint64_t>(m.partition.n_steps));
    detail::write_pod<uint64_t>(os, m.partition.bounds.size());
    for (auto [lo, hi] : m.partition.bounds) {
        detail::write_pod<uint64_t>(os, static_cast<uint64_t>(lo));
        detail::write_pod<uint64_t>(os, static_cast<uint64_t>(hi));
    }
    for (const auto& seg : m.segments) {
        detail::write_indices(os, seg.x_solution);
        detail::write_indices(os, seg.x_eim);
        detail::write_longs(os, seg.eim_iter);
        detail::write_indices(os, seg.x_enrich);
        detail::write_longs(os, seg.enrich_iter);
        detail::write_pod<uint64_t>(os, seg.geim_records.size());
        for (const auto& rec : seg.geim_records) {
            detail::write_pod<uint64_t>(os, static_cast<uint64_t>(rec.segment));
            detail::write_pod<uint64_t>(os, static_cast<uint64_t>(rec.grid));
            detail::write_pod<int64_t>(os, rec.time_index);
            detail::write_param(os, rec.mu);
        }
        detail::write_matrix(os, seg.residual_basis);
        detail::write_matrix(os, seg.sigma);
    }
    detail::write_pod<int64_t>(os, artifact.n_tpar);
    detail::write_pod<int64_t>(os, artifact.n_adap_total);
    detail::write_pod<uint8_t>(os, artifact.truncated ? 1 : 0);
}

struct LoadedArtifact {
    OfflineArtifact artifact; // model.problem left null; caller rebuilds it
    std::string config_json;
};

inline LoadedArtifact read_artifact(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != std::string(kModelMagic, 8))
        throw ArtifactVersionMismatch("bad artifact magic bytes");
    if (detail::read_pod<uint32_t>(is) != kFormatVersion)
        throw ArtifactVersionMismatch("unsupported artifact format version");
    LoadedArtifact out;
    const auto json_len = detail::read_pod<uint64_t>(is);
    out.config_json.resize(json_len);
    is.read(out.config_json.data(), static_cast<std::streamsize>(json_len));
    if (!is) throw ArtifactVersionMismatch("truncated config section");

    ReducedModel& m = out.artifact.model;
    m.basis.V = detail::read_matrix(is);
    m.basis.R = detail::read_matrix(is);
    const auto n_prov = detail::read_pod<uint64_t>(is);
    m.basis.provenance.resize(n_prov);
    for (auto& prov : m.basis.provenance) {
        prov.time_index = static_cast<long>(detail::read_pod<int64_t>(is));
        prov.mu = detail::read_param(is);
    }
    m.partition.n_steps = static_cast<long>(detail::read_pod<uint64_t>(is));
    const auto n_seg = detail::read_pod<uint64_t>(is);
    m.partition.bounds.resize(n_seg);
    for (auto& b : m.partition.bounds) {
        b.first = static_cast<long>(detail::read_pod<uint64_t>(is));
        b.second = static_cast<long>(detail::read_pod<uint64_t>(is));
    }
    m.segments.resize(n_seg);
    for (auto& seg : m.segments) {
        seg.x_solution = detail::read_indices(is);
        seg.x_eim = detail::read_indices(is);
        seg.eim_iter = detail::read_longs(is);
        seg.x_enrich = detail::read_indices(is);
        seg.enrich_iter = detail::read_longs(is);
        const auto n_rec = detail::read_pod<uint64_t>(is);
        seg.geim_records.resize(n_rec);
        for (auto& rec : seg.geim_records) {
            rec.segment = static_cast<long>(detail::read_pod<uint64_t>(is));
            rec.grid = static_cast<Index>(detail::read_pod<uint64_t>(is));
            rec.time_index = static_cast<long>(detail::read_pod<int64_t>(is));
            rec.mu = detail::read_param(is);
        }
        seg.residual_basis = detail::read_matrix(is);
        seg.sigma = detail::read_matrix(is);
        seg.rebuild_selector();
    }
    out.artifact.n_tpar = static_cast<long>(detail::read_pod<int64_t>(is));
    out.artifact.n_adap_total = static_cast<long>(detail::read_pod<int64_t>(is));
    out.artifact.truncated = detail::read_pod<uint8_t>(is) != 0;
    return out;
}

inline LoadedArtifact load_artifact(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return read_artifact(is);
}

// Model payload bytes with the (mode-dependent) config section stripped;
// two runs produce the same reduced model iff these bytes agree.
inline std::string artifact_payload_bytes(const OfflineArtifact& artifact) {
    std::ostringstream os(std::ios::binary);
    write_artifact(os, artifact, "");
    return os.str();
}

// ---------------------------------------------------------------------------
// Run-log CSV (one line per greedy iteration)

inline void write_history_csv(std::ostream& os, const GreedyHistory& history,
                              const std::string& config_hash) {
    os << "# format_version: " << kFormatVersion << "\n";
    if (!config_hash.empty()) os << "# config_sha256: " << config_hash << "\n";
    os << "n,n_tpar,restarts,mu,t_index,delta,rho,enrich_added_per_segment\n";
    for (const auto& rec : history.records) {
        os << rec.n << ',' << rec.n_tpar << ',' << rec.restarts << ',';
        for (Index i = 0; i < rec.mu.size(); ++i) {
            if (i) os << ';';
            os << fmt_double(rec.mu[i]);
        }
        os << ',' << rec.t_index << ',' << fmt_double(rec.delta) << ',' << fmt_double(rec.rho)
           << ',';
        for (size_t j = 0; j < rec.enrich_added.size(); ++j) {
            if (j) os << ';';
            os << rec.enrich_added[j];
        }
        os << '\n';
    }
}

} // namespace aaroc

#endif
