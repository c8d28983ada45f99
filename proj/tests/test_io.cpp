#include <gtest/gtest.h>

#include <filesystem>

#include "ionforge/io.hpp"

namespace ionforge {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ionforge_test_io";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Fingerprint, HexRoundTrip) {
  for (std::uint64_t v : {0ULL, 1ULL, 0xdeadbeefcafef00dULL, ~0ULL}) EXPECT_EQ(parse_hex64(hex64(v)), v);
  EXPECT_EQ(hex64(255).size(), 16u);
  EXPECT_NE(fnv1a("a"), fnv1a("b"));
}

TEST(Fingerprint, DistinguishesChains) {
  const auto a = chain_fingerprint(build_chain(tune_trap(5)));
  EXPECT_EQ(a, chain_fingerprint(build_chain(tune_trap(5))));
  EXPECT_NE(a, chain_fingerprint(build_chain(tune_trap(6))));
  EXPECT_NE(a, chain_fingerprint(build_chain(tune_trap(5, 1.1e6))));
}

TEST(Json, ChainRoundTrip) {
  const ChainModel c = build_chain(tune_trap(6));
  const Eigen::VectorXd mu = compute_beat_notes(c.mode_freqs);
  const json j = json::parse(chain_to_json(c, &mu).dump());
  EXPECT_EQ(j["schema"], "chain/1");
  EXPECT_EQ(j["beat_notes_hz"].size(), 6u);
  const ChainModel back = chain_from_json(j);
  EXPECT_EQ(back.trap.n_ions, 6);
  EXPECT_EQ(back.trap.omega_z, c.trap.omega_z);
  EXPECT_EQ(chain_fingerprint(build_chain(back.trap)), chain_fingerprint(c));
  EXPECT_LT((back.mode_freqs - c.mode_freqs).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(back.lamb_dicke, c.lamb_dicke);
  EXPECT_EQ(back.positions, c.positions);
}

TEST(Json, SchemaMismatchRejected) {
  json j = chain_to_json(build_chain(tune_trap(3)));
  j["schema"] = "chain/2";
  EXPECT_THROW(chain_from_json(j), SchemaError);
  j.erase("schema");
  EXPECT_THROW(chain_from_json(j), SchemaError);
  EXPECT_THROW(trap_from_json(json{{"n_ions", 3}}), SchemaError);
}

TEST(Json, GraphRoundTripAndSizeCheck) {
  const InteractionGraph g{4, Eigen::VectorXd::LinSpaced(6, -1.0, 1.5), false};
  const auto back = graph_from_json(json::parse(graph_to_json(g).dump()));
  EXPECT_EQ(back.n, 4);
  EXPECT_EQ(back.couplings, g.couplings);
  EXPECT_FALSE(back.normalized);
  EXPECT_THROW(graph_from_json(json{{"n", 4}, {"couplings", {1, 2, 3}}}), SchemaError);
  const std::string csv = graph_to_csv(g);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "i,j,J_rad_per_s");
}

TEST(Json, LatticeForms) {
  EXPECT_EQ(lattice_from_json("kagome:10").label(), "kagome:10");
  EXPECT_EQ(lattice_from_json(json{{"kind", "square"}, {"n", 10}}).label(), "square:2x5");
  const auto custom = lattice_from_json(json::parse(R"({"kind":"custom","n":4,"edges":[[0,1],[2,3,0.5]]})"));
  ASSERT_EQ(custom.edges.size(), 2u);
  EXPECT_EQ(custom.edges[1].weight, 0.5);
  const auto back = lattice_from_json(lattice_to_json(custom));
  EXPECT_EQ(back.edges.size(), 2u);
  EXPECT_THROW(lattice_from_json(json::parse(R"({"kind":"custom","n":4,"edges":[[0]]})")), SchemaError);
  EXPECT_THROW(lattice_from_json(json{{"kind", "square"}}), SchemaError);
}

TEST(Json, TrainConfigRoundTrip) {
  TrainConfig c;
  c.hidden_dim = 77;
  c.lr0 = 0.5e-3;
  c.seed = 1234567890123ULL;
  const auto back = train_config_from_json(train_config_to_json(c));
  EXPECT_EQ(back.hidden_dim, 77);
  EXPECT_EQ(back.lr0, 0.5e-3);
  EXPECT_EQ(back.seed, c.seed);
}

TEST(Binary, CheckpointRoundTripBitExact) {
  Checkpoint ck{init_params(5, 12, 3), json{{"note", "x"}}};
  ck.params.b2.setLinSpaced(25, -1.0 / 3.0, 2.0 / 7.0);
  const auto path = scratch("ck.ionnet");
  write_checkpoint(path, ck);
  const auto back = read_checkpoint(path);
  EXPECT_EQ(back.params.w1, ck.params.w1);
  EXPECT_EQ(back.params.b1, ck.params.b1);
  EXPECT_EQ(back.params.w2, ck.params.w2);
  EXPECT_EQ(back.params.b2, ck.params.b2);
  EXPECT_EQ(back.meta["note"], "x");
  const std::string bytes = read_text(path);
  EXPECT_EQ(bytes.substr(0, 8), "IONNET01");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 5u);  // little-endian N
}

TEST(Binary, CheckpointCorruptionDetected) {
  const std::string good = encode_checkpoint({init_params(3, 4, 1), json::object()});
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), SchemaError);
  EXPECT_THROW(decode_checkpoint(good.substr(0, 40)), SchemaError);
  bad = good;
  bad.back() = '!';
  EXPECT_THROW(decode_checkpoint(bad), SchemaError);
  bad = good;
  bad[8] = 0;  // N = 0
  EXPECT_THROW(decode_checkpoint(bad), SchemaError);
  EXPECT_THROW(read_checkpoint(scratch("does-not-exist.ionnet")), IoError);
}

TEST(Binary, DatasetRoundTripBitExact) {
  const RamanSetup s(build_chain(tune_trap(4)));
  const Dataset d = generate_dataset(s, 17, 9, 0xabcdef0123456789ULL);
  const auto path = scratch("d.bin");
  write_dataset(path, d, json{{"schema", "dataset/1"}});
  const auto back = read_dataset(path);
  EXPECT_EQ(back.data.targets, d.targets);
  EXPECT_EQ(back.data.n_ions, 4);
  EXPECT_EQ(back.data.seed, 9u);
  EXPECT_EQ(back.data.chain_fingerprint, 0xabcdef0123456789ULL);
  EXPECT_EQ(back.meta["schema"], "dataset/1");
}

TEST(Binary, DatasetCorruptionDetected) {
  const RamanSetup s(build_chain(tune_trap(3)));
  const std::string good = encode_dataset(generate_dataset(s, 5, 1));
  EXPECT_THROW(decode_dataset(good.substr(0, 30)), SchemaError);
  std::string bad = good;
  bad[16] = 99;  // count far beyond the payload
  EXPECT_THROW(decode_dataset(bad), SchemaError);
  EXPECT_THROW(decode_checkpoint(good), SchemaError);
}

TEST(Files, WriteIsAtomicAndCreatesDirectories) {
  const auto path = scratch("nested/dir/out.json");
  write_json(path, json{{"a", 1}});
  EXPECT_EQ(read_json(path)["a"], 1);
  write_json(path, json{{"a", 2}});
  EXPECT_EQ(read_json(path)["a"], 2);
  for (const auto& e : fs::directory_iterator(path.parent_path())) EXPECT_EQ(e.path().filename(), "out.json");
}

TEST(Files, MalformedJsonIsSchemaError) {
  const auto path = scratch("broken.json");
  write_text(path, "{ not json");
  EXPECT_THROW(read_json(path), SchemaError);
}

TEST(Csv, HistoryHasProvenanceAndHeader) {
  const std::vector<EpochRecord> h{{0, 1e-3, 0.5, 0.9, 0.0, 1.5, 0}, {1, 1e-3, 0.4, 0.95, 0.0, 1.4, 0}};
  const std::string csv = history_to_csv(h, json{{"seed", 3}, {"config_hash", "abc"}});
  EXPECT_NE(csv.find("# seed=3\n"), std::string::npos);
  EXPECT_NE(csv.find("# config_hash=abc\n"), std::string::npos);
  EXPECT_NE(csv.find("epoch,lr,train_cost,val_similarity,seconds\n0,"), std::string::npos);
}

TEST(Csv, ControlRows) {
  ControlMatrix c{Eigen::MatrixXd::Identity(2, 2), 2.0};
  const std::string csv = control_to_csv(c);
  EXPECT_FALSE(csv.empty());
  const json j = control_to_json(c);
  EXPECT_EQ(j["omega"].size(), 2u);
}

}  // namespace
}  // namespace ionforge
