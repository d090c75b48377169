#include "cdgnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cdgnet/errors.hpp"
#include "cdgnet/image_io.hpp"

namespace cdg {

namespace {

// Keeps epoch streams apart from the per-pair synthesis streams.
constexpr std::uint64_t kEpochStream = 1ull << 40;

void copy_into(Tensor<float>& dst, int n, const Tensor<float>& src) {
  const auto s = src.data();
  std::copy(s.begin(), s.end(), dst.mutable_data().begin() + n * s.size());
}

}  // namespace

Batch make_batch(const std::vector<ImagePair>& data, std::span<const std::size_t> indices, int crop,
                 std::mt19937_64& rng) {
  const int b = static_cast<int>(indices.size());
  Batch out{Tensor<float>(Shape{b, 3, crop, crop}), Tensor<float>(Shape{b, 3, crop, crop}),
            Tensor<float>(Shape{b, 1, crop, crop})};
  for (int i = 0; i < b; ++i) {
    const auto& pair = data.at(indices[i]);
    if (!pair.mask.defined()) throw InputError("pair '" + pair.id + "' has no sharpness mask");
    const auto c = random_crop(pair, crop, rng);
    copy_into(out.blurry, i, normalize(c.blurry));
    copy_into(out.sharp, i, normalize(c.sharp));
    copy_into(out.mask, i, c.mask);
  }
  return out;
}

Trainer::Trainer(const TrainConfig& cfg, std::vector<ImagePair> data)
    : cfg_(cfg), data_(std::move(data)), model_(cfg.model, cfg.seed), adam_(model_.params()) {
  cfg_.validate();
  if (data_.empty()) throw InputError("training set is empty");
  if (static_cast<int>(data_.size()) < cfg_.batch)
    throw InputError("training set has " + std::to_string(data_.size()) +
                     " pairs, fewer than one batch of " + std::to_string(cfg_.batch));
  for (const auto& p : data_) {
    const Shape s = p.sharp.shape();
    if (cfg_.crop > s.h || cfg_.crop > s.w)
      throw InputError("crop " + std::to_string(cfg_.crop) + " exceeds pair '" + p.id + "' (" +
                       std::to_string(s.h) + "x" + std::to_string(s.w) + ")");
  }
}

StepLosses Trainer::step(const Batch& batch, double lr) {
  auto& params = model_.params();
  params.zero_grad();
  const auto r = model_.forward(batch.blurry);
  const auto loss = total_loss(r.restored, r.large_image, r.small_image, batch.sharp, batch.mask,
                               cfg_.weights);
  StepLosses out{loss.total.item(), loss.rec.item(), loss.small.item(), loss.large.item()};
  if (!std::isfinite(out.total))
    throw NumericError("loss", "training loss became non-finite at epoch " + std::to_string(epoch_));
  backward(loss.total);
  adam_.step(params, lr);
  return out;
}

EpochMetrics Trainer::run_epoch(const std::function<void(const StepLosses&)>& on_step) {
  auto rng = derived_rng(cfg_.seed, kEpochStream + static_cast<std::uint64_t>(epoch_));
  std::vector<std::size_t> order(data_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  EpochMetrics m;
  m.epoch = epoch_;
  m.lr = cfg_.lr_for_epoch(epoch_);
  const int batches = batches_per_epoch();
  for (int b = 0; b < batches; ++b) {
    const std::span<const std::size_t> idx(order.data() + b * cfg_.batch, cfg_.batch);
    const auto s = step(make_batch(data_, idx, cfg_.crop, rng), m.lr);
    if (on_step) on_step(s);
    m.loss.total += s.total / batches;
    m.loss.rec += s.rec / batches;
    m.loss.small += s.small / batches;
    m.loss.large += s.large / batches;
  }
  ++epoch_;
  return m;
}

Checkpoint Trainer::checkpoint(bool with_optimizer) const {
  return make_checkpoint(model_.params(), with_optimizer ? &adam_ : nullptr, epoch_);
}

void Trainer::restore(const Checkpoint& ck) {
  restore_parameters(model_.params(), ck);
  if (ck.optimizer) {
    adam_.restore(ck.optimizer->step, ck.optimizer->first, ck.optimizer->second);
    epoch_ = ck.optimizer->epoch;
  }
}

std::vector<EpochMetrics> train(Trainer& trainer, const TrainOptions& opts,
                                std::vector<EpochMetrics> history) {
  auto persist = [&](bool checkpoint) {
    if (!opts.metrics.empty()) write_metrics(opts.metrics, history);
    if (checkpoint && !opts.checkpoint.empty()) save_checkpoint(trainer.checkpoint(), opts.checkpoint);
  };
  std::erase_if(history, [&](const EpochMetrics& m) { return m.epoch >= trainer.epoch(); });
  while (trainer.epoch() < trainer.config().epochs) {
    EpochMetrics m;
    try {
      m = trainer.run_epoch();
    } catch (const NumericError&) {
      persist(true);
      throw;
    }
    history.push_back(m);
    if (opts.on_epoch) opts.on_epoch(m);
    const bool periodic = opts.checkpoint_every > 0 && trainer.epoch() % opts.checkpoint_every == 0;
    persist(periodic);
  }
  persist(true);
  return history;
}

void write_metrics(const std::filesystem::path& path, const std::vector<EpochMetrics>& rows) {
  write_atomically(path, [&](std::ostream& out) {
    out << kMetricsHeader << "\n";
    char line[256];
    for (const auto& r : rows) {
      std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.epoch, r.lr, r.loss.total,
                    r.loss.rec, r.loss.small, r.loss.large);
      out << line;
    }
  });
}

std::vector<EpochMetrics> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics log '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw IoError("'" + path.string() + "' is not a metrics log");
  std::vector<EpochMetrics> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochMetrics r;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf", &r.epoch, &r.lr, &r.loss.total,
                    &r.loss.rec, &r.loss.small, &r.loss.large) != 6)
      throw IoError("malformed metrics row in '" + path.string() + "': " + line);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cdg
