#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace ownrecon;
using ownrecon::testing::scratch_dir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

nlohmann::json small_config(const std::filesystem::path& out) {
  return {{"case", "tiny"},
          {"phantom", {{"kind", "shepp_logan"}, {"size", 32}}},
          {"mask", {{"kind", "equispaced"}, {"acceleration", 4.0}}},
          {"model",
           {{"groups", 2}, {"units_per_group", 1}, {"ssm", {{"d_model", 16}, {"d_head", 16}, {"d_state", 4}}}}},
          {"noise", {{"std", 0.01}, {"seed", 3}}},
          {"slices", 2},
          {"output_dir", out.string()}};
}

std::filesystem::path write_config(const std::filesystem::path& dir, const nlohmann::json& j) {
  std::filesystem::create_directories(dir);
  const auto p = dir / "run.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

}  // namespace

TEST(Cli, MaskPrintsSampledColumns) {
  const Outcome r = run({"mask", "--kind", "equispaced", "--width", "8", "--af", "4", "--center-frac", "0.25"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("sampled columns: 0 3 4\n"), std::string::npos) << r.out;
}

TEST(Cli, PhantomMaskSimulateChain) {
  const auto dir = scratch_dir("cli_chain");
  ASSERT_EQ(run({"phantom", "--size", "32", "--out", (dir / "x.fld").string()}).code, 0);
  ASSERT_EQ(run({"mask", "--width", "32", "--out", (dir / "m.fld").string()}).code, 0);
  const Outcome r = run({"simulate", "--image", (dir / "x.fld").string(), "--mask", (dir / "m.fld").string(),
                         "--coils", "4", "--out", (dir / "y.fld").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(dir / "y.fld").find("channels 4\n"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyIsAUsageError) {
  const auto dir = scratch_dir("cli_badkey");
  auto j = small_config(dir);
  j["model"]["ssm"]["dstate"] = 4;
  const Outcome r = run({"recon", "--config", write_config(dir, j).string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("model.ssm.dstate"), std::string::npos) << r.err;
}

TEST(Cli, ExitCodesByErrorKind) {
  const auto dir = scratch_dir("cli_codes");
  EXPECT_EQ(run({"recon", "--config", (dir / "missing.json").string()}).code, 3);
  std::ofstream(dir / "junk.fld") << "not a field";
  EXPECT_EQ(run({"simulate", "--image", (dir / "junk.fld").string(), "--mask", (dir / "junk.fld").string()}).code, 4);
  EXPECT_EQ(run({"mask", "--width", "8", "--af", "0.5"}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
}

TEST(Cli, ZeroDecodeMatchesZeroFilled) {
  const auto dir = scratch_dir("cli_zero");
  auto j = small_config(dir / "out");
  j["zero_decode"] = true;
  j["slices"] = 1;
  ASSERT_EQ(run({"recon", "--config", write_config(dir, j).string()}).code, 0);
  const auto metrics = nlohmann::json::parse(slurp(dir / "out" / "metrics.json"));
  const auto& s = metrics["slices"][0];
  EXPECT_EQ(s["psnr"].get<double>(), s["zero_filled_psnr"].get<double>());
  EXPECT_EQ(s["dc_calls"].get<int>(), 0);
}

TEST(Cli, ReconIsDeterministicAcrossRunsAndJobs) {
  const auto dir = scratch_dir("cli_repeat");
  const auto a = write_config(dir / "a", small_config(dir / "a" / "out"));
  const auto b = write_config(dir / "b", small_config(dir / "b" / "out"));
  ASSERT_EQ(run({"recon", "--config", a.string()}).code, 0);
  ASSERT_EQ(run({"recon", "--config", b.string(), "--jobs", "2"}).code, 0);
  for (const char* f : {"metrics.json", "slice0/x_hat.fld", "slice1/x_hat.fld", "slice1/zero_filled.fld"})
    EXPECT_EQ(slurp(dir / "a" / "out" / f), slurp(dir / "b" / "out" / f)) << f;
}

TEST(Cli, SavedWeightsReload) {
  const auto dir = scratch_dir("cli_weights");
  auto j = small_config(dir / "first");
  j["slices"] = 1;
  j["save_weights"] = true;
  ASSERT_EQ(run({"recon", "--config", write_config(dir, j).string()}).code, 0);
  j["save_weights"] = false;
  j["weights_path"] = (dir / "first" / "weights.bin").string();
  j["output_dir"] = (dir / "second").string();
  ASSERT_EQ(run({"recon", "--config", write_config(dir, j).string()}).code, 0);
  EXPECT_EQ(slurp(dir / "first" / "slice0" / "x_hat.fld"), slurp(dir / "second" / "slice0" / "x_hat.fld"));

  j["model"]["ssm"]["d_state"] = 8;
  EXPECT_EQ(run({"recon", "--config", write_config(dir, j).string()}).code, 4);
}

TEST(Cli, DiagnoseFromProbes) {
  const auto dir = scratch_dir("cli_probes");
  auto j = small_config(dir / "out");
  j["slices"] = 1;
  j["write_probes"] = true;
  ASSERT_EQ(run({"recon", "--config", write_config(dir, j).string()}).code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "slice0" / "probes" / "unit1_readout.fld"));
  const Outcome r = run({"diagnose", "--probes", (dir / "out").string(), "--out", (dir / "diag").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(dir / "diag" / "report.json"));
  EXPECT_EQ(report.size(), 2u);
}

TEST(Cli, AblateCoversEveryVariant) {
  const auto dir = scratch_dir("cli_ablate");
  auto j = small_config(dir / "out");
  j["slices"] = 1;
  const Outcome r = run({"ablate", "--config", write_config(dir, j).string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("content residency changes content tokens: yes"), std::string::npos);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_EQ(report.size(), 16u);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "ablation.json"));
  EXPECT_EQ(summary["variants"].size(), 8u);
  EXPECT_TRUE(summary["content_token_check"]["differs"].get<bool>());
}

TEST(Cli, SelftestPasses) {
  const Outcome r = run({"selftest"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
