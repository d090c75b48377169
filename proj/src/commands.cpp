#include "cdgnet/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "cdgnet/checkpoint.hpp"
#include "cdgnet/config.hpp"
#include "cdgnet/dataset.hpp"
#include "cdgnet/diagnostics.hpp"
#include "cdgnet/errors.hpp"
#include "cdgnet/image_io.hpp"
#include "cdgnet/imaging.hpp"
#include "cdgnet/trainer.hpp"

namespace cdg {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Half-pixel-centred bilinear resize of a single-image tensor, clamped borders.
Tensor<float> resize_bilinear(const Tensor<float>& img, int height, int width) {
  const Shape s = img.shape();
  Tensor<float> out(Shape{1, s.c, height, width});
  auto src = img.data();
  auto dst = out.mutable_data();
  const double sy = static_cast<double>(s.h) / height;
  const double sx = static_cast<double>(s.w) / width;
  for (int c = 0; c < s.c; ++c) {
    const float* plane = src.data() + static_cast<std::size_t>(c) * s.h * s.w;
    for (int y = 0; y < height; ++y) {
      const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, s.h - 1.0);
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, s.h - 1);
      const double ty = fy - y0;
      for (int x = 0; x < width; ++x) {
        const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, s.w - 1.0);
        const int x0 = static_cast<int>(fx);
        const int x1 = std::min(x0 + 1, s.w - 1);
        const double tx = fx - x0;
        const double top = plane[y0 * s.w + x0] * (1 - tx) + plane[y0 * s.w + x1] * tx;
        const double bottom = plane[y1 * s.w + x0] * (1 - tx) + plane[y1 * s.w + x1] * tx;
        dst[(static_cast<std::size_t>(c) * height + y) * width + x] =
            static_cast<float>(top * (1 - ty) + bottom * ty);
      }
    }
  }
  return out;
}

int pad_to_four(int extent) { return (4 - extent % 4) % 4; }

}  // namespace

CdgNet<float> load_model(const fs::path& checkpoint) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  CdgNet<float> net(infer_model_config(ck), 0);
  restore_parameters(net.params(), ck);
  return net;
}

Restoration restore_image(const CdgNet<float>& net, const Tensor<float>& img01) {
  const Shape s = img01.shape();
  Restoration r;
  r.pad_bottom = pad_to_four(s.h);
  r.pad_right = pad_to_four(s.w);
  const int ph = s.h + r.pad_bottom;
  const int pw = s.w + r.pad_right;
  const auto padded =
      r.pad_bottom || r.pad_right ? reflect_pad(img01, r.pad_bottom, r.pad_right) : img01;

  NoGradGuard guard;
  const auto out = net.forward(normalize(padded));
  auto back = [&](const Tensor<float>& t) { return crop(t, 0, 0, s.h, s.w); };
  r.image = back(denormalize(out.restored));
  r.large_image = back(denormalize(out.large_image));
  r.small_image = back(denormalize(out.small_image));
  r.large_spatial = back(resize_bilinear(out.large_spatial_map, ph, pw));
  r.small_spatial = back(resize_bilinear(out.small_spatial_map, ph, pw));
  return r;
}

// ------------------------------------------------------------------- train

fs::path metrics_path_for(const fs::path& checkpoint) {
  fs::path p = checkpoint;
  return p.replace_extension(".metrics.csv");
}

void cmd_train(const TrainCommand& cmd, std::ostream& log) {
  TrainConfig cfg = load_config(cmd.config);
  if (cmd.seed) cfg.seed = *cmd.seed;
  const auto scan = scan_dataset(cmd.data);
  for (const auto& name : scan.unpaired) log << "warning: skipping unpaired file " << name << "\n";
  if (scan.pairs.empty()) throw InputError("no image pairs under '" + cmd.data.string() + "'");
  auto data = load_pairs(cmd.data, scan, cfg.mu);
  log << "loaded " << data.size() << " pairs\n";

  Trainer trainer(cfg, std::move(data));
  const fs::path metrics = metrics_path_for(cmd.out);
  std::vector<EpochMetrics> history;
  if (cmd.resume) {
    trainer.restore(load_checkpoint(*cmd.resume));
    const fs::path old_metrics = metrics_path_for(*cmd.resume);
    if (fs::exists(old_metrics)) history = read_metrics(old_metrics);
    log << "resuming at epoch " << trainer.epoch() << ", lr "
        << fmt("%.6g", cfg.lr_for_epoch(trainer.epoch())) << "\n";
  }

  TrainOptions opts;
  opts.checkpoint = cmd.out;
  opts.metrics = metrics;
  opts.checkpoint_every = cmd.checkpoint_every;
  const int every = std::max(1, cmd.log_every);
  opts.on_epoch = [&](const EpochMetrics& m) {
    if ((m.epoch + 1) % every != 0 && m.epoch + 1 != cfg.epochs) return;
    log << "epoch " << m.epoch << " lr " << fmt("%.3g", m.lr) << " loss "
        << fmt("%.6f", m.loss.total) << " (rec " << fmt("%.6f", m.loss.rec) << ", small "
        << fmt("%.6f", m.loss.small) << ", large " << fmt("%.6f", m.loss.large) << ")\n";
  };
  train(trainer, opts, std::move(history));
  log << "wrote " << cmd.out.string() << " and " << metrics.string() << "\n";
}

// ------------------------------------------------------------------ deblur

DeblurReport cmd_deblur(const DeblurCommand& cmd, std::ostream& log) {
  const auto net = load_model(cmd.checkpoint);
  const auto img = load_image(cmd.in);
  const auto r = restore_image(net, img);
  DeblurReport rep;
  rep.pad_bottom = r.pad_bottom;
  rep.pad_right = r.pad_right;
  if (r.pad_bottom || r.pad_right)
    log << "reflect-padded " << img.shape().h << "x" << img.shape().w << " by " << r.pad_bottom
        << " rows and " << r.pad_right << " columns, cropped back after inference\n";
  save_image(r.image, cmd.out);
  rep.written.push_back(cmd.out);
  if (cmd.dump_aux) {
    fs::create_directories(*cmd.dump_aux);
    const Tensor<float>* aux[] = {&r.large_image, &r.small_image, &r.large_spatial,
                                  &r.small_spatial};
    for (int i = 0; i < 4; ++i) {
      const fs::path p = *cmd.dump_aux / kAuxFiles[i];
      save_image(*aux[i], p);
      rep.written.push_back(p);
    }
  }
  for (const auto& p : rep.written) log << "wrote " << p.string() << "\n";
  return rep;
}

// -------------------------------------------------------------------- eval

EvalRow mean_row(const std::vector<EvalRow>& rows) {
  EvalRow m;
  m.name = "mean";
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.psnr += r.psnr;
    m.ssim += r.ssim;
  }
  m.psnr /= static_cast<double>(rows.size());
  m.ssim /= static_cast<double>(rows.size());
  return m;
}

void write_eval_csv(const fs::path& path, const EvalReport& report) {
  auto number = [](double v) { return std::isinf(v) ? std::string("inf") : fmt("%.17g", v); };
  write_atomically(path, [&](std::ostream& out) {
    out << kEvalHeader << "\n";
    for (const auto& r : report.rows) out << r.name << "," << number(r.psnr) << "," << number(r.ssim) << "\n";
    out << report.mean.name << "," << number(report.mean.psnr) << "," << number(report.mean.ssim)
        << "\n";
  });
}

EvalReport cmd_eval(const EvalCommand& cmd, std::ostream& log) {
  const auto net = load_model(cmd.checkpoint);
  const auto scan = scan_dataset(cmd.data);
  EvalReport rep;
  rep.skipped = scan.unpaired;
  for (const auto& name : scan.unpaired) log << "warning: skipping unpaired file " << name << "\n";
  for (const auto& pair : scan.pairs) {
    const auto blurry = load_image(pair.blurry);
    const auto sharp = load_image(pair.sharp);
    if (!(blurry.shape() == sharp.shape()))
      throw DimensionError("height", "pair '" + pair.name + "': blurry and sharp extents differ");
    const auto restored = restore_image(net, blurry).image;
    EvalRow row{pair.name, psnr(restored, sharp), ssim(restored, sharp)};
    log << row.name << "  psnr " << fmt("%.4f", row.psnr) << "  ssim " << fmt("%.5f", row.ssim)
        << "\n";
    rep.rows.push_back(std::move(row));
  }
  rep.mean = mean_row(rep.rows);
  log << "mean  psnr " << fmt("%.4f", rep.mean.psnr) << "  ssim " << fmt("%.5f", rep.mean.ssim)
      << "  (" << rep.rows.size() << " images)\n";
  fs::path csv = cmd.csv;
  if (csv.empty()) csv = fs::path(cmd.checkpoint).replace_extension(".eval.csv");
  write_eval_csv(csv, rep);
  log << "wrote " << csv.string() << "\n";
  return rep;
}

// ---------------------------------------------------------------- diagnose

void write_diagnostics_csv(const fs::path& path, const Tensor<float>& rgb01) {
  const auto hist = gradient_histogram(rgb01);
  const auto spec = fourier_spectrum(rgb01);
  write_atomically(path, [&](std::ostream& out) {
    out << "bin_index,count\n";
    for (std::size_t i = 0; i < hist.size(); ++i) out << i << "," << hist[i] << "\n";
    out << "\nradius,log_mag\n";
    for (std::size_t r = 0; r < spec.radial_log_mag.size(); ++r)
      out << r << "," << fmt("%.17g", spec.radial_log_mag[r]) << "\n";
    out << "\nhf_ratio\n" << fmt("%.17g", spec.hf_ratio) << "\n";
  });
}

void cmd_diagnose(const fs::path& in, const fs::path& out, std::ostream& log) {
  const auto img = load_image(in);
  write_diagnostics_csv(out, img);
  log << "hf_ratio " << fmt("%.6f", fourier_spectrum(img).hf_ratio) << ", tail mass "
      << tail_mass(gradient_histogram(img)) << "\nwrote " << out.string() << "\n";
}

// --------------------------------------------------------------- gradcheck

std::vector<std::string> cmd_gradcheck(std::uint64_t seed, const std::string& op,
                                       std::ostream& log) {
  std::vector<std::string> failed;
  for (const auto& c : run_gradcheck_suite(seed, op)) {
    char line[160];
    std::snprintf(line, sizeof line, "%-18s max_rel_err %.3e  probes %6zu  %6.2fs  %s\n",
                  c.op.c_str(), c.max_rel_err, c.probes, c.seconds, c.passed() ? "ok" : "FAIL");
    log << line;
    if (!c.passed()) failed.push_back(c.op);
  }
  return failed;
}

// ------------------------------------------------------------------- synth

void cmd_synth(const SynthCommand& cmd, std::ostream& log) {
  if (cmd.count < 1 || cmd.height < 8 || cmd.width < 8)
    throw InputError("synth needs count >= 1 and extents >= 8");
  for (int i = 0; i < cmd.count; ++i) {
    auto pair = synth_pair(cmd.height, cmd.width, cmd.seed, static_cast<std::uint64_t>(i));
    char name[32];
    std::snprintf(name, sizeof name, "%04d.png", i);
    pair.id = name;
    pair.mask = Tensor<float>();
    write_pair(cmd.out, pair);
  }
  log << "wrote " << cmd.count << " pairs under " << cmd.out.string() << "\n";
}

}  // namespace cdg
