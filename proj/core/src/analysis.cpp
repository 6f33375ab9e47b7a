#include "specdec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "specdec/errors.hpp"

namespace specdec {

void PatternStats::merge(const PatternStats& other) {
  for (const auto& [key, c] : other.counts) counts[key] += c;
  for (const auto& [key, samples] : other.log10_ratios) {
    auto& dst = log10_ratios[key];
    dst.insert(dst.end(), samples.begin(), samples.end());
  }
  total += other.total;
}

namespace {

void collect_one(PatternStats& stats, TokenId draft_tok, TokenId target_tok, double p_draft_t1,
                 double p_star_t1) {
  if (p_star_t1 <= 0.0) {
    throw InvariantError("correction token with non-positive target probability");
  }
  const PatternStats::Key key{draft_tok, target_tok};
  stats.counts[key] += 1;
  stats.log10_ratios[key].push_back(std::log10(p_draft_t1 / p_star_t1));
  stats.total += 1;
}

}  // namespace

PatternStats collect(const std::vector<RejectionRecord>& records) {
  PatternStats stats;
  for (const auto& r : records) {
    collect_one(stats, r.draft_tok, r.target_tok, r.p_draft_t1, r.p_star_t1);
  }
  return stats;
}

double head_coverage(const PatternStats& stats, double head_fraction) {
  if (!(head_fraction > 0.0 && head_fraction <= 1.0)) {
    throw InvariantError("head_fraction must be in (0, 1]");
  }
  if (stats.counts.empty()) throw InvariantError("head_coverage of empty stats");

  std::vector<std::pair<PatternStats::Key, std::uint64_t>> entries(stats.counts.begin(),
                                                                   stats.counts.end());
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  const auto head =
      static_cast<std::size_t>(std::ceil(head_fraction * static_cast<double>(entries.size())));
  std::uint64_t head_mass = 0;
  for (std::size_t i = 0; i < head && i < entries.size(); ++i) head_mass += entries[i].second;
  return static_cast<double>(head_mass) / static_cast<double>(stats.total);
}

RatioHistogram ratio_histogram(const PatternStats& stats, PatternStats::Key pair,
                               const std::vector<double>& bin_edges) {
  auto it = stats.log10_ratios.find(pair);
  if (it == stats.log10_ratios.end()) {
    throw InvariantError("ratio_histogram: pair not present in stats");
  }
  RatioHistogram hist;
  hist.bins.assign(bin_edges.size() > 0 ? bin_edges.size() - 1 : 0, 0);
  for (double v : it->second) {
    if (bin_edges.empty() || v < bin_edges.front()) {
      ++hist.underflow;
    } else if (v >= bin_edges.back()) {
      ++hist.overflow;
    } else {
      const auto upper = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
      hist.bins[static_cast<std::size_t>(upper - bin_edges.begin()) - 1] += 1;
    }
  }
  return hist;
}

PatternStats analyze_log(const std::string& event_log_path) {
  std::ifstream in(event_log_path);
  if (!in) throw IoError("cannot open event log: " + event_log_path);

  PatternStats stats;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad event-log record: ") + e.what(), line_no);
    }
    if (!record.contains("rejections") || !record["rejections"].is_array()) {
      throw ParseError("event-log record missing 'rejections' array", line_no);
    }
    for (const auto& e : record["rejections"]) {
      if (!e.contains("draft_token") || !e.contains("correction_token") ||
          !e.contains("p_draft_t1") || !e.contains("p_star_t1")) {
        throw ParseError("rejection record missing required fields", line_no);
      }
      collect_one(stats, e["draft_token"].get<TokenId>(), e["correction_token"].get<TokenId>(),
                  e["p_draft_t1"].get<double>(), e["p_star_t1"].get<double>());
    }
  }
  return stats;
}

void write_pattern_report(const PatternStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << "draft_token\ttarget_token\tcount\tshare\tcumulative_share\n";
  if (stats.counts.empty()) return;

  std::vector<std::pair<PatternStats::Key, std::uint64_t>> entries(stats.counts.begin(),
                                                                   stats.counts.end());
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  double cumulative = 0.0;
  for (const auto& [key, c] : entries) {
    const double share = static_cast<double>(c) / static_cast<double>(stats.total);
    cumulative += share;
    out << key.first << '\t' << key.second << '\t' << c << '\t' << share << '\t' << cumulative
        << '\n';
  }
}

void write_histogram_report(const RatioHistogram& hist, const std::vector<double>& bin_edges,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << "bin_lo\tbin_hi\tcount\n";
  out << "-inf\t" << (bin_edges.empty() ? std::string("inf") : std::to_string(bin_edges.front()))
      << '\t' << hist.underflow << '\n';
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
    out << bin_edges[i] << '\t' << bin_edges[i + 1] << '\t' << hist.bins[i] << '\n';
  }
  out << (bin_edges.empty() ? std::string("-inf") : std::to_string(bin_edges.back()))
      << "\tinf\t" << hist.overflow << '\n';
}

}  // namespace specdec
