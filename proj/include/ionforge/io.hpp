#pragma once

// Serialization: JSON documents (chain/1, graph/1, lattice specs, reports),
// CSV tables, and the little-endian binary checkpoint and dataset files.
//
// Checkpoint ("IONNET01"):
//   magic[8] | u64 N | u64 hidden | w1 (hidden x N(N-1)/2) | b1 (hidden)
//   | w2 (N^2 x hidden) | b2 (N^2) | JSON trailer to end of file
// Dataset ("IONDAT01"):
//   magic[8] | u64 N | u64 count | count samples of N(N-1)/2 | JSON trailer
// Matrices are row-major, all floats are IEEE-754 binary64, little-endian.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chain.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "fingerprint.hpp"
#include "forward_model.hpp"
#include "lattice.hpp"
#include "network.hpp"
#include "train.hpp"

namespace ionforge {

using json = nlohmann::json;

inline constexpr std::string_view kChainSchema = "chain/1";
inline constexpr std::string_view kGraphSchema = "graph/1";
inline constexpr std::string_view kCheckpointMagic = "IONNET01";
inline constexpr std::string_view kDatasetMagic = "IONDAT01";

inline std::uint64_t config_hash(const json& config) { return fnv1a(config.dump()); }

// ---------------------------------------------------------------- JSON helpers

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("matrix must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) throw SchemaError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

inline json vector_to_json(const Eigen::VectorXd& v, double factor = 1.0) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k] * factor);
  return a;
}

inline Eigen::VectorXd vector_from_json(const json& j, double factor = 1.0) {
  if (!j.is_array()) throw SchemaError("expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = j[k].get<double>() * factor;
  return v;
}

inline void require_schema(const json& j, std::string_view expected) {
  if (!j.contains("schema") || j["schema"].get<std::string>() != expected)
    throw SchemaError("expected schema '" + std::string(expected) + "', found '" +
                      (j.contains("schema") ? j["schema"].dump() : std::string("none")) + "'");
}

/// Hz for humans; the rad/s copies make the round trip bit-exact, which the
/// chain fingerprint check relies on.
inline json trap_to_json(const TrapConfig& t) {
  return {{"n_ions", t.n_ions},
          {"f_x_hz", t.omega_x / kTwoPi},
          {"f_z_hz", t.omega_z / kTwoPi},
          {"omega_x_rad_s", t.omega_x},
          {"omega_z_rad_s", t.omega_z}};
}

inline TrapConfig trap_from_json(const json& j) {
  try {
    const bool exact = j.contains("omega_x_rad_s") && j.contains("omega_z_rad_s");
    TrapConfig t{j.at("n_ions").get<int>(),
                 exact ? j["omega_x_rad_s"].get<double>() : j.at("f_x_hz").get<double>() * kTwoPi,
                 exact ? j["omega_z_rad_s"].get<double>() : j.at("f_z_hz").get<double>() * kTwoPi};
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("trap: ") + e.what());
  }
}

/// chain/1 document. Frequencies in Hz (omega / 2 pi).
inline json chain_to_json(const ChainModel& c, const Eigen::VectorXd* beat_notes = nullptr) {
  json j = {{"schema", kChainSchema},
            {"trap", trap_to_json(c.trap)},
            {"fingerprint", hex64(chain_fingerprint(c))},
            {"positions", vector_to_json(c.positions)},
            {"length_scale_m", c.length_scale},
            {"mode_freqs_hz", vector_to_json(c.mode_freqs, 1.0 / kTwoPi)},
            {"mode_matrix", matrix_to_json(c.mode_matrix)},
            {"lamb_dicke", matrix_to_json(c.lamb_dicke)}};
  if (beat_notes) j["beat_notes_hz"] = vector_to_json(*beat_notes, 1.0 / kTwoPi);
  return j;
}

inline ChainModel chain_from_json(const json& j) {
  require_schema(j, kChainSchema);
  try {
    ChainModel c;
    c.trap = trap_from_json(j.at("trap"));
    c.positions = vector_from_json(j.at("positions"));
    c.length_scale = j.at("length_scale_m").get<double>();
    c.mode_freqs = vector_from_json(j.at("mode_freqs_hz"), kTwoPi);
    c.mode_matrix = matrix_from_json(j.at("mode_matrix"));
    c.lamb_dicke = matrix_from_json(j.at("lamb_dicke"));
    if (c.positions.size() != c.trap.n_ions || c.mode_freqs.size() != c.trap.n_ions)
      throw SchemaError("chain: array sizes disagree with n_ions");
    return c;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("chain: ") + e.what());
  }
}

inline json graph_to_json(const InteractionGraph& g) {
  return {{"schema", kGraphSchema}, {"n", g.n}, {"normalized", g.normalized}, {"couplings", vector_to_json(g.couplings)}};
}

inline InteractionGraph graph_from_json(const json& j) {
  if (j.contains("schema")) require_schema(j, kGraphSchema);
  try {
    InteractionGraph g{j.at("n").get<int>(), vector_from_json(j.at("couplings")), j.value("normalized", false)};
    if (g.couplings.size() != pair_count(g.n))
      throw SchemaError("graph: expected " + std::to_string(pair_count(g.n)) + " couplings for n=" +
                        std::to_string(g.n));
    return g;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("graph: ") + e.what());
  }
}

/// Rows "i,j,J_ij".
inline std::string graph_to_csv(const InteractionGraph& g) {
  std::ostringstream os;
  os << std::setprecision(17) << "i,j," << (g.normalized ? "J_normalized" : "J_rad_per_s") << "\n";
  int p = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j, ++p) os << i << "," << j << "," << g.couplings[p] << "\n";
  return os.str();
}

inline json lattice_to_json(const LatticeSpec& s) {
  json j = {{"kind", to_string(s.kind)}, {"dims", s.dims}, {"n", s.n_ions}};
  if (s.kind == LatticeKind::custom_edges) {
    json e = json::array();
    for (const auto& edge : s.edges) e.push_back({edge.i, edge.j, edge.weight});
    j["edges"] = e;
  }
  return j;
}

/// {"kind": "...", "dims": [...], "n": N, "edges": [[i, j] or [i, j, w], ...]}.
inline LatticeSpec lattice_from_json(const json& j) {
  if (j.is_string()) return parse_lattice(j.get<std::string>());
  try {
    LatticeSpec s;
    s.kind = lattice_kind_from_string(j.at("kind").get<std::string>());
    s.n_ions = j.at("n").get<int>();
    if (j.contains("dims")) s.dims = j["dims"].get<std::vector<int>>();
    if (s.dims.empty() && s.kind != LatticeKind::custom_edges) s = default_spec(s.kind, s.n_ions);
    if (j.contains("edges"))
      for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() < 2 || e.size() > 3) throw SchemaError("lattice: edges are [i, j] or [i, j, w]");
        s.edges.push_back({e[0].get<int>(), e[1].get<int>(), e.size() == 3 ? e[2].get<double>() : 1.0});
      }
    lattice_edges(s);
    return s;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("lattice: ") + e.what());
  }
}

inline json train_config_to_json(const TrainConfig& c) {
  return {{"train_size", c.train_size},   {"val_size", c.val_size},         {"epochs", c.epochs},
          {"batch_size", c.batch_size},   {"lr0", c.lr0},                   {"lr_decay", c.lr_decay},
          {"decay_every", c.decay_every}, {"dropout_rate", c.dropout_rate}, {"hidden_dim", c.hidden_dim},
          {"seed", c.seed},               {"adam_beta1", c.adam.beta1},     {"adam_beta2", c.adam.beta2},
          {"adam_eps", c.adam.eps}};
}

/// Missing fields keep their defaults.
inline TrainConfig train_config_from_json(const json& j, TrainConfig c = {}) {
  try {
    c.train_size = j.value("train_size", c.train_size);
    c.val_size = j.value("val_size", c.val_size);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr0 = j.value("lr0", c.lr0);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.decay_every = j.value("decay_every", c.decay_every);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.seed = j.value("seed", c.seed);
    c.adam.beta1 = j.value("adam_beta1", c.adam.beta1);
    c.adam.beta2 = j.value("adam_beta2", c.adam.beta2);
    c.adam.eps = j.value("adam_eps", c.adam.eps);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("train config: ") + e.what());
  }
  return c;
}

inline json control_to_json(const ControlMatrix& c) {
  return {{"scale_rad_per_s", c.scale}, {"omega", matrix_to_json(c.omega)}};
}

inline std::string control_to_csv(const ControlMatrix& c) {
  std::ostringstream os;
  os << std::setprecision(17) << "ion,beat_note,omega\n";
  for (Eigen::Index i = 0; i < c.omega.rows(); ++i)
    for (Eigen::Index n = 0; n < c.omega.cols(); ++n) os << i << "," << n << "," << c.omega(i, n) << "\n";
  return os.str();
}

inline json eval_report_to_json(const EvalReport& r) {
  json curve = json::array();
  for (const auto& p : r.crosstalk)
    curve.push_back({{"epsilon", p.epsilon}, {"error", p.error}, {"similarity", p.similarity}});
  json j = {{"target", r.target},
            {"similarity", r.similarity},
            {"crosstalk", curve},
            {"power_budget_hz", r.power_budget / kTwoPi},
            {"physical_scale_hz", r.physical_scale / kTwoPi},
            {"physical_norm_hz", r.physical_norm / kTwoPi},
            {"max_adiabatic_ratio", r.max_adiabatic_ratio},
            {"phonon_estimate", r.phonon_estimate}};
  if (r.crosstalk_fit.coeffs.size() == 2)
    j["crosstalk_fit"] = {{"intercept", r.crosstalk_fit.coeffs[0]},
                          {"slope", r.crosstalk_fit.coeffs[1]},
                          {"r2", r.crosstalk_fit.r2}};
  return j;
}

inline std::string crosstalk_to_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << std::setprecision(12) << "target,epsilon,error,similarity\n";
  for (const auto& r : reports)
    for (const auto& p : r.crosstalk) os << r.target << "," << p.epsilon << "," << p.error << "," << p.similarity << "\n";
  return os.str();
}

// ---------------------------------------------------------------- files

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

/// Writes via a temporary file and rename, so readers never see a partial file.
inline void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

namespace detail {

class ByteWriter {
 public:
  void raw(std::string_view s) { buf_.append(s); }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) buf_.push_back(static_cast<char>((v >> (8 * b)) & 0xffU));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  template <typename M>
  void matrix_row_major(const M& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}

  void expect_magic(std::string_view magic) {
    need(magic.size());
    if (std::string_view(data_).substr(pos_, magic.size()) != magic)
      throw SchemaError("'" + name_ + "': bad magic, expected " + std::string(magic));
    pos_ += magic.size();
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void matrix_row_major(Eigen::MatrixXd& m) {
    need(static_cast<std::size_t>(m.size()) * 8);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64();
  }
  void vector(Eigen::VectorXd& v) {
    need(static_cast<std::size_t>(v.size()) * 8);
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = f64();
  }
  std::string rest() {
    std::string r = data_.substr(pos_);
    pos_ = data_.size();
    return r;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw SchemaError("'" + name_ + "': truncated file");
  }
  std::string data_;
  std::string name_;
  std::size_t pos_ = 0;
};

inline json parse_trailer(const std::string& text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + name + "': corrupt JSON trailer: " + e.what());
  }
}

}  // namespace detail

struct Checkpoint {
  NetworkParams params;
  json meta;  // train config, init descriptor, chain, seed, metrics
};

inline std::string encode_checkpoint(const Checkpoint& ck) {
  ck.params.validate();
  detail::ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u64(static_cast<std::uint64_t>(ck.params.n_ions()));
  w.u64(static_cast<std::uint64_t>(ck.params.hidden_dim()));
  w.matrix_row_major(ck.params.w1);
  w.matrix_row_major(ck.params.b1);
  w.matrix_row_major(ck.params.w2);
  w.matrix_row_major(ck.params.b2);
  w.raw(ck.meta.dump());
  return w.bytes();
}

inline Checkpoint decode_checkpoint(std::string bytes, const std::string& name = "checkpoint") {
  detail::ByteReader r(std::move(bytes), name);
  r.expect_magic(kCheckpointMagic);
  const auto n = r.u64();
  const auto hidden = r.u64();
  if (n < 2 || n > 4096 || hidden < 1 || hidden > (1ULL << 24))
    throw SchemaError("'" + name + "': implausible header (N=" + std::to_string(n) + ", hidden=" + std::to_string(hidden) + ")");
  Checkpoint ck{NetworkParams::zeros(static_cast<int>(n), static_cast<int>(hidden)), {}};
  r.matrix_row_major(ck.params.w1);
  r.vector(ck.params.b1);
  r.matrix_row_major(ck.params.w2);
  r.vector(ck.params.b2);
  ck.meta = detail::parse_trailer(r.rest(), name);
  return ck;
}

inline void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  write_text(path, encode_checkpoint(ck));
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_text(path), path.string());
}

inline std::string encode_dataset(const Dataset& d, const json& meta = json::object()) {
  detail::ByteWriter w;
  w.raw(kDatasetMagic);
  w.u64(static_cast<std::uint64_t>(d.n_ions));
  w.u64(static_cast<std::uint64_t>(d.count()));
  w.matrix_row_major(d.targets.transpose());
  json trailer = meta;
  trailer["seed"] = d.seed;
  trailer["chain_fingerprint"] = hex64(d.chain_fingerprint);
  w.raw(trailer.dump());
  return w.bytes();
}

struct DatasetFile {
  Dataset data;
  json meta;
};

inline DatasetFile decode_dataset(std::string bytes, const std::string& name = "dataset") {
  detail::ByteReader r(std::move(bytes), name);
  r.expect_magic(kDatasetMagic);
  const auto n = r.u64();
  const auto count = r.u64();
  if (n < 2 || n > 4096) throw SchemaError("'" + name + "': implausible N=" + std::to_string(n));
  const auto pairs = static_cast<std::uint64_t>(pair_count(static_cast<int>(n)));
  if (count == 0 || count > r.remaining() / (8 * pairs))
    throw SchemaError("'" + name + "': sample count " + std::to_string(count) + " exceeds file size");
  DatasetFile f;
  f.data.n_ions = static_cast<int>(n);
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pairs));
  r.matrix_row_major(samples);
  f.data.targets = samples.transpose();
  f.meta = detail::parse_trailer(r.rest(), name);
  f.data.seed = f.meta.value("seed", std::uint64_t{0});
  if (f.meta.contains("chain_fingerprint")) f.data.chain_fingerprint = parse_hex64(f.meta["chain_fingerprint"]);
  return f;
}

inline void write_dataset(const std::filesystem::path& path, const Dataset& d, const json& meta = json::object()) {
  write_text(path, encode_dataset(d, meta));
}

inline DatasetFile read_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_text(path), path.string());
}

/// History CSV with '#' provenance lines ahead of the header row.
inline std::string history_to_csv(const std::vector<EpochRecord>& h, const json& provenance = json::object()) {
  std::ostringstream os;
  for (const auto& [k, v] : provenance.items()) os << "# " << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  os << std::setprecision(12) << "epoch,lr,train_cost,val_similarity,seconds\n";
  for (const auto& r : h)
    os << r.epoch << "," << r.lr << "," << r.train_cost << "," << r.val_similarity << "," << r.seconds << "\n";
  return os.str();
}

}  // namespace ionforge
