// Small end-to-end run: synthesize events, extract descriptors, train a
// BiLSTM classifier and report test accuracy.
//
//   aecd_demo [events_per_class] [epochs]

#include <cstdio>
#include <cstdlib>

#include "aecd/eval/eval.hpp"

using namespace aecd;

int main(int argc, char** argv) {
  const std::size_t per_class = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 40;
  const std::size_t epochs = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 40;

  synth::SynthConfig scfg;
  scfg.seed = 11;
  const auto labels = synth::shuffled_labels(per_class, scfg.seed);
  const auto feats = eval::extract_features(eval::synthetic_source(labels, scfg), scfg.transducer(), {});
  std::printf("extracted %zu events (%zu failed)\n", feats.features.size(), feats.failures.size());

  const auto data = eval::prepare(feats.features, descriptors::Lambda::L5, {}, scfg.seed);
  nn::TrainConfig cfg;
  cfg.max_epochs = epochs;
  cfg.minibatch = 16;
  cfg.learning_rate = 0.01;
  const auto result = nn::train(data.train, data.val, 16, cfg);
  for (const auto& h : result.history) {
    std::printf("epoch %3zu  j_trn %.4f  j_val %.4f  val_acc %.3f\n", h.epoch, h.j_trn, h.j_val, h.val_acc);
  }
  const auto test = eval::evaluate(result.model, data.test);
  std::printf("best epoch %zu, test accuracy %.3f\n%s", result.best_epoch, test.accuracy,
              eval::confusion_text(test.confusion).c_str());
}
