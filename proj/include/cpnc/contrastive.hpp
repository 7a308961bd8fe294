#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cpnc/kg.hpp"
#include "cpnc/matrix.hpp"
#include "cpnc/text_encoder.hpp"

namespace cpnc {

// (anchor, positive, hard negative) node triple; reverse samples swap the
// roles of head and tail.
struct ContrastiveSample {
  int32_t anchor = -1;
  int32_t positive = -1;
  int32_t hard_negative = -1;
  bool reverse = false;
};

struct SampleStats {
  int64_t emitted = 0;
  int64_t skipped = 0;  // anchors whose negative pool was exhausted
};

// One forward and one reverse sample per forward edge; hard negatives are
// drawn uniformly and rejected while linked to the anchor (either direction)
// or equal to it.
std::vector<ContrastiveSample> build_samples(const Graph& g, uint64_t seed,
                                             int max_rejection_attempts = 100,
                                             SampleStats* stats = nullptr);

double cosine_sim(std::span<const double> u, std::span<const double> v);

// Batch loss over M row-aligned triples: for each anchor, softmax
// cross-entropy over its cosine to every positive and every hard negative in
// the batch. Returns the batch sum; gradient outputs are optional.
double mnr_loss(const Matrix& anchors, const Matrix& positives,
                const Matrix& negatives, double temperature = 1.0,
                Matrix* d_anchors = nullptr, Matrix* d_positives = nullptr,
                Matrix* d_negatives = nullptr);

struct PretrainConfig {
  int batch_size = 128;
  int epochs = 3;
  double lr_encoder = 1e-4;
  double lr_head = 5e-5;
  uint64_t seed = 0;
  int max_rejection_attempts = 100;
  double temperature = 1.0;
  bool resample_negatives_each_epoch = false;
  bool use_projection_head = false;
};

struct PretrainResult {
  std::vector<double> epoch_loss;  // mean per-sample loss
  SampleStats resample_stats;
};

// Adam on mnr_loss over shuffled batches; deterministic per (seed, cfg). The
// graph is only consulted when negatives are resampled each epoch.
PretrainResult pretrain(TextEncoder& encoder, std::vector<ContrastiveSample> samples,
                        const Graph& graph, const PretrainConfig& cfg);

}  // namespace cpnc
