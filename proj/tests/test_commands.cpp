#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cdgnet/checkpoint.hpp"
#include "cdgnet/commands.hpp"
#include "cdgnet/config.hpp"
#include "cdgnet/dataset.hpp"
#include "cdgnet/diagnostics.hpp"
#include "cdgnet/errors.hpp"
#include "cdgnet/image_io.hpp"
#include "cdgnet/trainer.hpp"
#include "support.hpp"

using namespace cdg;
using test::TempDir;

namespace {

ModelConfig tiny_model() {
  ModelConfig m;
  m.channels = 8;
  m.small_channels = 4;
  m.reduction_ratio = 4;
  return m;
}

fs::path write_model(const fs::path& dir, const ModelConfig& cfg = tiny_model()) {
  CdgNet<float> net(cfg, 3);
  const fs::path p = dir / "model.ckpt";
  save_checkpoint(make_checkpoint(net.params()), p);
  return p;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

bool has_temp_files(const fs::path& dir) {
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == ".tmp") return true;
  return false;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CDGNET_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("gradcheck suite") {
  const auto& ops = gradcheck_ops();
  for (const char* required :
       {"conv2d", "conv_transpose2d", "relu", "sigmoid", "global_avg_pool", "ewise", "bilinear",
        "deform_conv2d", "resblock", "rdb", "channel_attention", "spatial_attention", "acda",
        "large_decoder", "small_decoder", "off", "total_loss"})
    CHECK(std::find(ops.begin(), ops.end(), required) != ops.end());

  SUBCASE("a filtered run checks one op and repeats the full run's numbers") {
    const auto a = run_gradcheck_suite(7, "deform_conv2d");
    const auto b = run_gradcheck_suite(7, "deform_conv2d");
    REQUIRE(a.size() == 1);
    CHECK(a[0].op == "deform_conv2d");
    CHECK(a[0].max_rel_err == b[0].max_rel_err);
    CHECK(a[0].passed());
    const auto other_seed = run_gradcheck_suite(8, "deform_conv2d");
    CHECK(other_seed[0].max_rel_err != a[0].max_rel_err);
  }
  SUBCASE("unknown op") { CHECK_THROWS_AS(run_gradcheck_suite(0, "softmax"), InputError); }
  SUBCASE("block-level ops pass at 64-bit tolerance") {
    for (const char* op : {"relu", "bilinear", "rdb", "acda", "off"}) {
      const auto r = run_gradcheck_suite(1, op);
      CAPTURE(op);
      CHECK(r[0].max_rel_err <= 1e-6);
      CHECK(r[0].probes > 0);
    }
  }
}

TEST_CASE("deblur crops back to the input extents and dumps four aux maps") {
  TempDir dir("cdg_cmd_deblur");
  const auto ckpt = write_model(dir.path);
  auto pair = synth_pair(30, 26, 4, 0);
  save_image(pair.blurry, dir.path / "in.png");
  std::ostringstream log;
  const auto rep = cmd_deblur({ckpt, dir.path / "in.png", dir.path / "out.png", dir.path / "aux"}, log);
  CHECK(rep.pad_bottom == 2);
  CHECK(rep.pad_right == 2);
  CHECK(log.str().find("reflect-padded") != std::string::npos);
  CHECK(load_image(dir.path / "out.png").shape() == Shape{1, 3, 30, 26});

  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "aux")) {
    (void)e;
    ++count;
  }
  CHECK(count == 4);
  for (const char* name : kAuxFiles) CHECK(fs::exists(dir.path / "aux" / name));
  CHECK(load_image(dir.path / "aux" / "large_image.png").shape() == Shape{1, 3, 30, 26});
  CHECK(load_gray_image(dir.path / "aux" / "small_spatial_map.png").shape() == Shape{1, 1, 30, 26});
  CHECK_FALSE(has_temp_files(dir.path));
}

TEST_CASE("restore_image leaves divisible extents unpadded") {
  CdgNet<float> net(tiny_model(), 1);
  const auto r = restore_image(net, synth_pair(16, 20, 2, 0).blurry);
  CHECK(r.pad_bottom == 0);
  CHECK(r.pad_right == 0);
  CHECK(r.image.shape() == Shape{1, 3, 16, 20});
  for (float v : r.large_spatial.data()) REQUIRE((v > 0.0f && v < 1.0f));
}

TEST_CASE("eval writes a row per pair plus the mean, skipping unpaired files") {
  TempDir dir("cdg_cmd_eval");
  const auto ckpt = write_model(dir.path);
  const fs::path data = dir.path / "data";
  for (int i = 0; i < 3; ++i) {
    auto p = synth_pair(16, 16, 6, i);
    p.id = "p" + std::to_string(i) + ".png";
    write_pair(data, p);
  }
  save_image(synth_pair(16, 16, 6, 9).blurry, data / "blur" / "orphan.png");
  std::ostringstream log;
  const auto rep = cmd_eval({ckpt, data, dir.path / "eval.csv"}, log);
  CHECK(rep.rows.size() == 3);
  CHECK(rep.skipped == std::vector<std::string>{"blur/orphan.png"});
  CHECK(log.str().find("warning: skipping unpaired file blur/orphan.png") != std::string::npos);

  const auto lines = lines_of(dir.path / "eval.csv");
  REQUIRE(lines.size() == 1 + 3 + 1);
  CHECK(lines[0] == kEvalHeader);
  CHECK(lines.back().rfind("mean,", 0) == 0);
  double psnr_sum = 0, ssim_sum = 0;
  for (const auto& r : rep.rows) {
    psnr_sum += r.psnr;
    ssim_sum += r.ssim;
  }
  CHECK(std::abs(rep.mean.psnr - psnr_sum / 3) <= 1e-9);
  CHECK(std::abs(rep.mean.ssim - ssim_sum / 3) <= 1e-9);

  SUBCASE("default CSV path sits next to the checkpoint") {
    cmd_eval({ckpt, data, {}}, log);
    CHECK(fs::exists(dir.path / "model.eval.csv"));
  }
}

TEST_CASE("eval rows for identical images") {
  const auto img = synth_pair(16, 16, 1, 0).sharp;
  EvalRow row{"same", psnr(img, img), ssim(img, img)};
  CHECK(std::isinf(row.psnr));
  CHECK(row.ssim == 1.0);
  TempDir dir("cdg_cmd_eval_inf");
  EvalReport rep{{row}, mean_row({row}), {}};
  write_eval_csv(dir.path / "e.csv", rep);
  const auto lines = lines_of(dir.path / "e.csv");
  REQUIRE(lines.size() == 3);
  CHECK(lines[1] == "same,inf,1");
  CHECK(lines[2] == "mean,inf,1");
}

TEST_CASE("diagnose CSV sections") {
  TempDir dir("cdg_cmd_diag");
  SUBCASE("constant image has a zero hf_ratio row") {
    save_image(Tensor<float>(Shape{1, 3, 24, 24}, 0.4f), dir.path / "flat.png");
    std::ostringstream log;
    cmd_diagnose(dir.path / "flat.png", dir.path / "flat.csv", log);
    const auto lines = lines_of(dir.path / "flat.csv");
    const auto radii = fourier_spectrum(Tensor<float>(Shape{1, 3, 24, 24}, 0.4f)).radial_log_mag.size();
    REQUIRE(lines.size() == 1 + kHistogramBins + 1 + 1 + radii + 1 + 1 + 1);
    CHECK(lines[0] == "bin_index,count");
    CHECK(lines[1] == "0,484");
    CHECK(lines[kHistogramBins + 1].empty());
    CHECK(lines[kHistogramBins + 2] == "radius,log_mag");
    CHECK(lines[lines.size() - 2] == "hf_ratio");
    CHECK(std::stod(lines.back()) == 0.0);
  }
  SUBCASE("sharp source has the larger hf_ratio") {
    BlurFieldOptions opts;
    opts.large_min = 11;
    const auto pair = synth_pair(48, 48, 12, 0, opts);
    save_image(pair.sharp, dir.path / "s.png");
    save_image(pair.blurry, dir.path / "b.png");
    std::ostringstream log;
    cmd_diagnose(dir.path / "s.png", dir.path / "s.csv", log);
    cmd_diagnose(dir.path / "b.png", dir.path / "b.csv", log);
    CHECK(std::stod(lines_of(dir.path / "s.csv").back()) >
          std::stod(lines_of(dir.path / "b.csv").back()));
  }
}

TEST_CASE("train command: toy run, resume and failures") {
  TempDir dir("cdg_cmd_train");
  const fs::path data = dir.path / "data";
  std::ostringstream log;
  cmd_synth({data, 8, 32, 32, 11}, log);
  {
    std::ofstream cfg(dir.path / "toy.cfg");
    cfg << "channels=16\nsmall_channels=16\nreduction_ratio=8\nepochs=50\nbatch=4\ncrop=16\n"
           "lr_step=20\nseed=2\n";
  }
  const fs::path ckpt = dir.path / "toy.ckpt";
  TrainCommand cmd{data, dir.path / "toy.cfg", ckpt, {}, {}, 0, 10};
  cmd_train(cmd, log);
  const auto rows = read_metrics(metrics_path_for(ckpt));
  REQUIRE(rows.size() == 50);
  CHECK(rows.back().epoch == 49);
  CHECK(rows.back().lr == doctest::Approx(1e-4 * 0.25));
  CHECK(std::isfinite(rows.back().loss.total));
  CHECK_FALSE(has_temp_files(dir.path));

  SUBCASE("resume continues the epoch counter and schedule") {
    {
      std::ofstream cfg(dir.path / "more.cfg");
      cfg << "channels=16\nsmall_channels=16\nreduction_ratio=8\nepochs=55\nbatch=4\ncrop=16\n"
             "lr_step=20\nseed=2\n";
    }
    const fs::path next = dir.path / "more.ckpt";
    TrainCommand more{data, dir.path / "more.cfg", next, ckpt, {}, 0, 1};
    std::ostringstream rlog;
    cmd_train(more, rlog);
    CHECK(rlog.str().find("resuming at epoch 50, lr 2.5e-05") != std::string::npos);
    const auto all = read_metrics(metrics_path_for(next));
    REQUIRE(all.size() == 55);
    for (int e = 0; e < 55; ++e) CHECK(all[e].epoch == e);
    CHECK(all[54].lr == doctest::Approx(1e-4 * 0.25));
    CHECK(load_checkpoint(next).optimizer->epoch == 55);
  }
  SUBCASE("unknown config key names the key") {
    std::ofstream(dir.path / "bad.cfg") << "channels=16\nlearning_rate=1\n";
    try {
      cmd_train({data, dir.path / "bad.cfg", dir.path / "x.ckpt", {}, {}, 0, 1}, log);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("learning_rate") != std::string::npos);
    }
    CHECK_FALSE(fs::exists(dir.path / "x.ckpt"));
  }
  SUBCASE("empty dataset") {
    fs::create_directories(dir.path / "empty" / "blur");
    fs::create_directories(dir.path / "empty" / "sharp");
    CHECK_THROWS_AS(cmd_train({dir.path / "empty", dir.path / "toy.cfg", dir.path / "y.ckpt", {},
                               {}, 0, 1},
                              log),
                    InputError);
  }
}

TEST_CASE("a checkpoint inconsistent with its inferred config is rejected") {
  TempDir dir("cdg_cmd_mismatch");
  auto ck = make_checkpoint(CdgNet<float>(tiny_model(), 1).params());
  for (auto& t : ck.params)
    if (t.name == "small_decoder.tail.weight") {
      t.dims[0] += 1;
      t.data.resize(t.data.size() + t.data.size() / 4);
    }
  save_checkpoint(ck, dir.path / "bad.ckpt");
  try {
    load_model(dir.path / "bad.ckpt");
    FAIL("expected CheckpointShapeError");
  } catch (const CheckpointShapeError& e) {
    CHECK(e.parameter() == "small_decoder.tail.weight");
  }
  save_image(synth_pair(16, 16, 1, 0).blurry, dir.path / "in.png");
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_deblur({dir.path / "bad.ckpt", dir.path / "in.png", dir.path / "o.png", {}}, log),
                  CheckpointShapeError);
  CHECK_FALSE(fs::exists(dir.path / "o.png"));
}

TEST_CASE("command-line exit codes") {
  TempDir dir("cdg_cmd_cli");
  const std::string d = dir.path.string();
  CHECK(run_cli("gradcheck --op relu") == 0);
  CHECK(run_cli("gradcheck --op nonsense") != 0);
  CHECK(run_cli("synth --out " + d + "/data --count 2 --height 16 --width 16") == 0);
  std::ofstream(dir.path / "bad.cfg") << "colour=blue\n";
  CHECK(run_cli("train --data " + d + "/data --config " + d + "/bad.cfg --out " + d + "/m.ckpt") !=
        0);
  CHECK(run_cli("deblur --ckpt " + d + "/missing.ckpt --in x.png --out y.png") != 0);
  CHECK(run_cli("") != 0);
}
