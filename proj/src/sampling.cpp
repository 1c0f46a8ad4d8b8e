#include "enrich/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "enrich/error.hpp"
#include "enrich/text.hpp"

namespace enrich {

SamplingMode sampling_mode_from_string(std::string_view s) {
  if (s == "random" || s == "random-fraction" || s == "random_fraction") return SamplingMode::RandomFraction;
  if (s == "stratified") return SamplingMode::Stratified;
  if (s == "top-k" || s == "top_k" || s == "top_k_per_group") return SamplingMode::TopKPerGroup;
  throw ValidationError("unknown sampling mode: " + std::string(s));
}

void SamplingPlan::check(const Corpus& corpus) const {
  if (mode == SamplingMode::TopKPerGroup) {
    if (k <= 0) throw ValidationError("k must be positive");
  } else if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("fraction must be in (0, 1]");
  }
  if (mode != SamplingMode::RandomFraction) corpus.require_schema(group_attr);
}

std::optional<std::string> group_value(const CorpusRecord& rec, std::string_view attribute) {
  return gold_value(rec, attribute);
}

namespace {

// Group keys in schema order, then any out-of-schema values sorted.
std::vector<std::string> group_order(const Corpus& corpus, std::string_view attr,
                                     const std::map<std::string, std::vector<std::size_t>>& groups) {
  std::vector<std::string> order;
  const AttributeSchema& schema = corpus.require_schema(attr);
  for (const auto& v : schema.values) order.push_back(v);
  for (const auto& [g, _] : groups) {
    if (!schema.contains(g)) order.push_back(g);
  }
  return order;
}

std::map<std::string, std::vector<std::size_t>> group_indices(const Corpus& corpus, std::string_view attr) {
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    auto g = group_value(corpus.records[i], attr);
    if (!g) {
      missing.push_back(corpus.records[i].id);
      continue;
    }
    groups[*g].push_back(i);
  }
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw ValidationError("records without a " + std::string(attr) + " value: " + ids);
  }
  return groups;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

// `count` distinct positions of [0, n) chosen by a partial Fisher-Yates shuffle.
std::vector<std::size_t> choose(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = i;
  for (std::size_t i = 0; i < count; ++i) std::swap(pos[i], pos[i + bounded(rng, n - i)]);
  pos.resize(count);
  std::sort(pos.begin(), pos.end());
  return pos;
}

}  // namespace

Corpus top_k_by_engagement(const Corpus& corpus, int k, std::string_view group_attr) {
  if (k <= 0) throw ValidationError("k must be positive");
  std::vector<std::string> no_likes;
  for (const auto& r : corpus.records) {
    if (!r.likes) no_likes.push_back(r.id);
  }
  if (!no_likes.empty()) {
    std::string ids;
    for (const auto& id : no_likes) ids += (ids.empty() ? "" : ", ") + id;
    throw ValidationError("records without likes: " + ids);
  }
  auto groups = group_indices(corpus, group_attr);
  Corpus out = corpus.empty_like();
  for (const auto& g : group_order(corpus, group_attr, groups)) {
    auto it = groups.find(g);
    if (it == groups.end()) continue;
    auto idx = it->second;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = corpus.records[a];
      const auto& rb = corpus.records[b];
      if (*ra.likes != *rb.likes) return *ra.likes > *rb.likes;
      return ra.id < rb.id;
    });
    idx.resize(std::min(idx.size(), static_cast<std::size_t>(k)));
    for (auto i : idx) out.records.push_back(corpus.records[i]);
  }
  return out;
}

std::vector<std::size_t> allocate_largest_remainder(const std::vector<std::size_t>& sizes, double fraction) {
  std::size_t n = 0;
  for (auto s : sizes) n += s;
  const auto total = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> alloc(sizes.size());
  std::vector<double> rem(sizes.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double quota = fraction * static_cast<double>(sizes[i]);
    alloc[i] = std::min(sizes[i], static_cast<std::size_t>(std::floor(quota)));
    rem[i] = quota - static_cast<double>(alloc[i]);
    assigned += alloc[i];
  }
  std::vector<std::size_t> order(sizes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t pass = 0; assigned < total && pass < 2; ++pass) {
    for (auto i : order) {
      if (assigned >= total) break;
      if (alloc[i] < sizes[i] && (pass == 1 || rem[i] > 0.0)) {
        ++alloc[i];
        ++assigned;
      }
    }
  }
  return alloc;
}

SampleResult stratified_sample(const Corpus& corpus, const SamplingPlan& plan) {
  plan.check(corpus);
  SampleResult result{corpus.empty_like(), {}};
  std::vector<std::string> keys;
  std::vector<std::vector<std::size_t>> strata;
  if (plan.mode == SamplingMode::RandomFraction) {
    keys.emplace_back("*");
    strata.emplace_back(corpus.records.size());
    for (std::size_t i = 0; i < corpus.records.size(); ++i) strata[0][i] = i;
  } else {
    auto groups = group_indices(corpus, plan.group_attr);
    for (const auto& g : group_order(corpus, plan.group_attr, groups)) {
      auto it = groups.find(g);
      if (it == groups.end()) {
        result.notes.push_back("stratum " + plan.group_attr + "=" + g + " has 0 records; skipped");
        continue;
      }
      keys.push_back(g);
      strata.push_back(it->second);
    }
  }
  std::vector<std::size_t> sizes;
  for (const auto& s : strata) sizes.push_back(s.size());
  auto alloc = allocate_largest_remainder(sizes, plan.fraction);

  std::vector<std::size_t> chosen;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    // One stream per stratum key, so a stratum's draw does not depend on the others.
    std::mt19937_64 rng(splitmix64(plan.seed ^ fnv1a(keys[s])));
    for (auto p : choose(strata[s].size(), alloc[s], rng)) chosen.push_back(strata[s][p]);
  }
  std::sort(chosen.begin(), chosen.end());
  for (auto i : chosen) result.sample.records.push_back(corpus.records[i]);
  return result;
}

SampleResult sample(const Corpus& corpus, const SamplingPlan& plan) {
  if (plan.mode == SamplingMode::TopKPerGroup) {
    plan.check(corpus);
    return {top_k_by_engagement(corpus, plan.k, plan.group_attr), {}};
  }
  return stratified_sample(corpus, plan);
}

void SpamRuleSet::check() const {
  if (min_tokens < 0) throw ValidationError("min_tokens must be >= 0");
  if (!(max_url_fraction >= 0.0 && max_url_fraction <= 1.0)) {
    throw ValidationError("max_url_fraction must be in [0, 1]");
  }
}

SpamFilterResult spam_filter(const Corpus& corpus, const SpamRuleSet& rules) {
  rules.check();
  SpamFilterResult out{corpus.empty_like(), corpus.empty_like(), {}};
  std::unordered_map<std::string, std::string> first_by_text;
  for (const auto& r : corpus.records) {
    auto tokens = text::tokenize(r.text);
    std::string reason;
    if (static_cast<int>(tokens.size()) < rules.min_tokens) {
      reason = "too_few_tokens: " + std::to_string(tokens.size()) + " < " + std::to_string(rules.min_tokens);
    } else if (!tokens.empty()) {
      const auto urls = std::count(tokens.begin(), tokens.end(), text::kUrlToken);
      const double frac = static_cast<double>(urls) / static_cast<double>(tokens.size());
      if (frac > rules.max_url_fraction) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "url_fraction: %.3f > %.3f", frac, rules.max_url_fraction);
        reason = buf;
      }
    }
    if (reason.empty() && rules.drop_exact_duplicates) {
      auto [it, inserted] = first_by_text.emplace(r.text, r.id);
      if (!inserted) reason = "duplicate_of: " + it->second;
    }
    if (reason.empty()) {
      out.kept.records.push_back(r);
    } else {
      out.removed.records.push_back(r);
      out.reasons.push_back({r.id, std::move(reason)});
    }
  }
  return out;
}

}  // namespace enrich
