#include "softtree/udt.hpp"

#include <memory>
#include <optional>
#include <stdexcept>

#include "softtree/split.hpp"

namespace softtree {

namespace {
constexpr double kMinGain = 1e-12;
constexpr std::uint64_t kUdtStreamTag = 0x5544545350'4C4954ull;  // "UDTSPLIT"
}  // namespace

std::vector<ValueSample> udt_oversample(const Dataset& data,
                                        const WeightedView& view,
                                        std::size_t j, double range,
                                        const UdtConfig& cfg, RngStream& rng) {
  if (cfg.s < 1) throw std::invalid_argument("udt_oversample: s must be >= 1");
  if (cfg.w < 0) throw std::invalid_argument("udt_oversample: w must be >= 0");
  double sigma = cfg.w * range;
  std::vector<ValueSample> samples;
  samples.reserve(view.size() * static_cast<std::size_t>(cfg.s));
  for (const auto& e : view) {
    double x = data.at(e.row, j);
    if (Dataset::missing(x)) continue;
    int cls = data.labels[e.row];
    double w = e.weight / cfg.s;
    if (sigma > 0) {
      for (int k = 0; k < cfg.s; ++k)
        samples.push_back({x + sigma * rng.normal(), w, cls});
    } else {
      for (int k = 0; k < cfg.s; ++k) samples.push_back({x, w, cls});
    }
  }
  return samples;
}

SplitOverride make_udt_split_override(const Dataset& train,
                                      const UdtConfig& cfg,
                                      const RngStream& base) {
  auto ranges = std::make_shared<std::vector<double>>(train.cols());
  for (std::size_t j = 0; j < train.cols(); ++j)
    (*ranges)[j] = attribute_range(train, j);
  // Node visits happen in a fixed growth order, so a per-call counter keeps
  // the draws reproducible without threading a stream through the recursion.
  auto visit = std::make_shared<std::uint64_t>(0);
  const Dataset* data = &train;
  return [data, cfg, base, ranges, visit](const WeightedView& view, int,
                                          std::uint64_t* gain_evals)
             -> std::optional<SplitCandidate> {
    RngStream node_rng = base.derive({kUdtStreamTag, (*visit)++});
    std::optional<SplitCandidate> best;
    for (std::size_t j = 0; j < data->cols(); ++j) {
      RngStream attr_rng = node_rng.derive({j});
      std::vector<ValueSample> samples =
          udt_oversample(*data, view, j, (*ranges)[j], cfg, attr_rng);
      std::vector<ValueGroup> groups =
          group_value_samples(samples, data->class_count());
      std::optional<SplitCandidate> cand =
          hard_best_split(groups, data->class_count(), gain_evals);
      if (!cand || cand->gain <= kMinGain) continue;
      cand->attribute = static_cast<int>(j);
      if (!best || cand->gain_ratio > best->gain_ratio) best = std::move(cand);
    }
    return best;
  };
}

TreePtr train_udt(const Dataset& train, const GrowConfig& grow,
                  const PruneConfig& prune, const UdtConfig& cfg,
                  const RngStream& rng, GrowStats* stats) {
  GrowConfig gcfg = grow;
  gcfg.search = SearchMode::hard;
  gcfg.split_override = make_udt_split_override(train, cfg, rng);
  TreePtr tree = grow_tree(train, gcfg, stats);
  return ebp_prune(train, *tree, prune, gcfg);
}

}  // namespace softtree
