// cdgnet: train, deblur, eval, diagnose, gradcheck and synth subcommands.

#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "cdgnet/commands.hpp"

int main(int argc, char** argv) {
  using namespace cdg;
  CLI::App app{"Two-branch blur-aware image deblurring"};
  app.require_subcommand(1);

  TrainCommand train;
  std::uint64_t train_seed = 0;
  auto* tr = app.add_subcommand("train", "Train on a blur/ sharp/ dataset directory");
  tr->add_option("--data", train.data, "Dataset root")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--config", train.config, "key=value config file")->required();
  tr->add_option("--out", train.out, "Checkpoint to write")->required();
  auto* resume = tr->add_option("--resume", "Checkpoint to continue from")->check(CLI::ExistingFile);
  auto* seed_opt = tr->add_option("--seed", train_seed, "Override the config seed");
  tr->add_option("--checkpoint-every", train.checkpoint_every, "Epochs between checkpoints (0: end only)");
  tr->add_option("--log-every", train.log_every, "Epochs between log lines");

  DeblurCommand deblur;
  std::string aux_dir;
  auto* db = app.add_subcommand("deblur", "Deblur one PNG");
  db->add_option("--ckpt", deblur.checkpoint)->required()->check(CLI::ExistingFile);
  db->add_option("--in", deblur.in)->required()->check(CLI::ExistingFile);
  db->add_option("--out", deblur.out)->required();
  auto* aux = db->add_option("--dump-aux", aux_dir, "Directory for branch images and attention maps");

  EvalCommand eval;
  auto* ev = app.add_subcommand("eval", "PSNR/SSIM over a paired dataset");
  ev->add_option("--ckpt", eval.checkpoint)->required()->check(CLI::ExistingFile);
  ev->add_option("--data", eval.data)->required()->check(CLI::ExistingDirectory);
  ev->add_option("--csv", eval.csv, "CSV output (default: <ckpt>.eval.csv)");

  std::string diag_in, diag_out;
  auto* dg = app.add_subcommand("diagnose", "Gradient histogram and spectrum CSV for one PNG");
  dg->add_option("--in", diag_in)->required()->check(CLI::ExistingFile);
  dg->add_option("--out", diag_out)->required();

  std::string gc_op;
  std::uint64_t gc_seed = 0;
  auto* gc = app.add_subcommand("gradcheck", "64-bit finite-difference suite");
  gc->add_option("--op", gc_op, "Run only this op")->check(CLI::IsMember(gradcheck_ops()));
  gc->add_option("--seed", gc_seed);

  SynthCommand synth;
  auto* sy = app.add_subcommand("synth", "Write synthetic blurred/sharp pairs");
  sy->add_option("--out", synth.out)->required();
  sy->add_option("--count", synth.count);
  sy->add_option("--height", synth.height);
  sy->add_option("--width", synth.width);
  sy->add_option("--seed", synth.seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (tr->parsed()) {
      if (*resume) train.resume = resume->as<std::string>();
      if (*seed_opt) train.seed = train_seed;
      cmd_train(train, std::cout);
    } else if (db->parsed()) {
      if (*aux) deblur.dump_aux = aux_dir;
      cmd_deblur(deblur, std::cout);
    } else if (ev->parsed()) {
      cmd_eval(eval, std::cout);
    } else if (dg->parsed()) {
      cmd_diagnose(diag_in, diag_out, std::cout);
    } else if (gc->parsed()) {
      const auto failed = cmd_gradcheck(gc_seed, gc_op, std::cout);
      if (!failed.empty()) {
        std::cerr << "gradcheck failed:";
        for (const auto& op : failed) std::cerr << " " << op;
        std::cerr << "\n";
        return 1;
      }
    } else if (sy->parsed()) {
      cmd_synth(synth, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
