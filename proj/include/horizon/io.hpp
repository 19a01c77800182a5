#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "horizon/config.hpp"
#include "horizon/walker.hpp"

namespace horizon {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(emit_config(c))));
  return buf;
}

inline std::string format_csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes through a temporary file and renames on commit, so failed runs
/// leave no partial artifacts.
class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(const std::filesystem::path& path)
      : final_path_(path), tmp_path_(path.string() + ".tmp"), os_(tmp_path_, std::ios::binary | std::ios::trunc) {
    if (!os_) throw IoError("cannot open '" + tmp_path_.string() + "' for writing");
  }

  std::ostream& stream() { return os_; }

  void commit() {
    os_.flush();
    if (!os_) throw IoError("write failed for '" + tmp_path_.string() + "'");
    os_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_path_, final_path_, ec);
    if (ec) throw IoError("cannot rename temporary file onto '" + final_path_.string() + "'");
    committed_ = true;
  }

  ~AtomicFileWriter() {
    if (!committed_) {
      os_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_path_, ec);
    }
  }

 private:
  std::filesystem::path final_path_;
  std::filesystem::path tmp_path_;
  std::ofstream os_;
  bool committed_ = false;
};

inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  AtomicFileWriter w(path);
  w.stream() << content;
  w.commit();
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["alpha"] = c.alpha;
  j["alphas"] = c.alphas;
  j["fd_step"] = c.fd_step;
  j["format_version"] = c.format_version;
  j["functions"] = c.functions;
  j["generator_mode"] = c.generator_mode;
  j["initial"] = c.initial;
  j["integrator_step"] = c.integrator_step;
  j["law"] = c.law;
  j["manifold"] = c.manifold;
  j["max_arclength"] = c.max_arclength;
  j["mode"] = c.mode;
  j["record_points"] = c.record_points;
  j["replicas"] = c.replicas;
  j["richardson"] = c.richardson;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["sphere_epsilon"] = c.sphere_epsilon;
  j["t"] = c.t;
  j["t_grid"] = c.t_grid;
  return j;
}

inline nlohmann::json sidecar_base(const std::string& command, const RunConfig& c) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_to_json(c);
  j["config_hash"] = config_hash(c);
  j["format_version"] = kFormatVersion;
  return j;
}

// ---------------------------------------------------------------------------
// Walk/lift CSV batches
// ---------------------------------------------------------------------------

/// CSV schema: replica,time,x1,...,xd for base walks; lifted walks append
/// the frame matrix column-major as f{row}{col}.
inline std::string walk_csv_header(int d, bool lifted) {
  std::string h = "replica,time";
  for (int i = 0; i < d; ++i) h += ",x" + std::to_string(i + 1);
  if (lifted)
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) h += ",f" + std::to_string(r + 1) + std::to_string(c + 1);
  h += "\n";
  return h;
}

namespace detail {

inline void append_path_rows(std::string& buf, const Path& path) {
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    buf += std::to_string(path.replica);
    buf += ',';
    buf += format_csv_double(path.times[k]);
    const Vec& x = path.points[k];
    for (int i = 0; i < x.size(); ++i) {
      buf += ',';
      buf += format_csv_double(x[i]);
    }
    buf += '\n';
  }
}

inline void append_frame_path_rows(std::string& buf, const FramePath& path) {
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    buf += std::to_string(path.replica);
    buf += ',';
    buf += format_csv_double(path.times[k]);
    const FramePoint& u = path.points[k];
    for (int i = 0; i < u.base.coords.size(); ++i) {
      buf += ',';
      buf += format_csv_double(u.base.coords[i]);
    }
    for (int c = 0; c < u.frame.cols(); ++c)
      for (int r = 0; r < u.frame.rows(); ++r) {
        buf += ',';
        buf += format_csv_double(u.frame(r, c));
      }
    buf += '\n';
  }
}

}  // namespace detail

struct BatchSummary {
  std::uint64_t replicas = 0;
  std::uint64_t excluded = 0;
  std::string csv_path;
  std::string sidecar_path;
};

/// Runs all replicas and streams CSV rows in replica order. Replicas are
/// computed in parallel blocks but written sequentially, so output bytes are
/// independent of the thread count.
inline std::uint64_t write_walk_csv(const WalkConfig& cfg, bool lifted, std::ostream& os) {
  os << walk_csv_header(cfg.chart.dim, lifted);
  const int threads = resolve_threads(cfg.threads);
  const std::size_t n = static_cast<std::size_t>(cfg.replica_count);
  const std::size_t block = static_cast<std::size_t>(threads) * 8;
  std::uint64_t excluded = 0;
  std::vector<std::string> bufs;
  std::vector<std::uint8_t> exit_flags;
  for (std::size_t base = 0; base < n; base += block) {
    const std::size_t count = std::min(block, n - base);
    bufs.assign(count, {});
    exit_flags.assign(count, 0);
    parallel_for_indexed(count, threads, [&](std::size_t i) {
      const std::uint64_t replica = base + i;
      if (lifted) {
        LiftedWalkResult res = run_lifted_walk(cfg, replica);
        detail::append_frame_path_rows(bufs[i], res.frame_path);
        exit_flags[i] = res.frame_path.domain_exit ? 1 : 0;
      } else {
        Path path = run_base_walk(cfg, replica);
        detail::append_path_rows(bufs[i], path);
        exit_flags[i] = path.domain_exit ? 1 : 0;
      }
    });
    for (std::size_t i = 0; i < count; ++i) {
      os << bufs[i];
      excluded += exit_flags[i];
    }
  }
  return excluded;
}

/// Full batch artifact: <command>.csv plus <command>.json sidecar under
/// out_dir, both written atomically. Byte-identical for fixed
/// (seed, config) regardless of parallelism.
inline BatchSummary batch_run(const RunConfig& rc, bool lifted, const std::string& command) {
  const WalkConfig cfg = make_walk_config(rc);
  validate_walk_config(cfg);
  std::filesystem::create_directories(rc.out);
  const std::filesystem::path csv_path = std::filesystem::path(rc.out) / (command + ".csv");
  const std::filesystem::path json_path = std::filesystem::path(rc.out) / (command + ".json");

  BatchSummary summary;
  summary.replicas = cfg.replica_count;
  {
    AtomicFileWriter w(csv_path);
    summary.excluded = write_walk_csv(cfg, lifted, w.stream());
    w.commit();
  }
  nlohmann::json j = sidecar_base(command, rc);
  j["results"]["replicas"] = summary.replicas;
  j["results"]["excluded_replicas"] = summary.excluded;
  atomic_write_file(json_path, j.dump(2) + "\n");
  summary.csv_path = csv_path.string();
  summary.sidecar_path = json_path.string();
  return summary;
}

}  // namespace horizon
