#include "clozegen/metrics.hpp"

#include "clozegen/errors.hpp"
#include "clozegen/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace clozegen {

bool match(std::string_view candidate, std::string_view gold) {
  return text::normalize(candidate) == text::normalize(gold);
}

EvalItemResult compute_item(std::string item_id, const std::vector<std::string>& generated,
                            const std::vector<std::string>& gold) {
  EvalItemResult r;
  r.item_id = std::move(item_id);

  std::set<std::string> gold_keys;
  for (const auto& g : gold) gold_keys.insert(text::normalize(g));

  std::vector<std::string> ranked;
  std::set<std::string> seen;
  for (const auto& g : generated) {
    auto key = text::normalize(g);
    if (seen.insert(key).second) ranked.push_back(std::move(key));
  }
  if (ranked.empty() || gold_keys.empty()) return r;

  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (gold_keys.count(ranked[i])) r.matched_ranks.push_back(i + 1);
  }

  r.p_at_1 = gold_keys.count(ranked.front()) ? 1.0 : 0.0;

  const std::size_t top3 = std::min<std::size_t>(3, ranked.size());
  const auto hits3 = static_cast<double>(std::count_if(r.matched_ranks.begin(), r.matched_ranks.end(),
                                                       [](std::size_t rank) { return rank <= 3; }));
  const double precision = hits3 / static_cast<double>(top3);
  const double recall = hits3 / static_cast<double>(gold_keys.size());
  r.f1_at_3 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;

  if (!r.matched_ranks.empty() && r.matched_ranks.front() <= 10) r.mrr_at_10 = 1.0 / static_cast<double>(r.matched_ranks.front());

  double dcg = 0.0;
  for (auto rank : r.matched_ranks) {
    if (rank <= 10) dcg += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
  }
  double idcg = 0.0;
  for (std::size_t rank = 1; rank <= std::min<std::size_t>(gold_keys.size(), 10); ++rank) {
    idcg += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
  }
  r.ndcg_at_10 = dcg / idcg;
  return r;
}

EvalReport evaluate_dataset(const std::vector<EvalInput>& items) {
  if (items.empty()) throw ContractViolation("evaluate_dataset: no items");
  EvalReport report;
  for (const auto& item : items) report.per_item.push_back(compute_item(item.item_id, item.generated, item.gold));
  report.item_count = report.per_item.size();
  const double n = static_cast<double>(report.item_count);
  for (const auto& r : report.per_item) {
    report.averages.p_at_1 += r.p_at_1;
    report.averages.f1_at_3 += r.f1_at_3;
    report.averages.mrr_at_10 += r.mrr_at_10;
    report.averages.ndcg_at_10 += r.ndcg_at_10;
  }
  report.averages.p_at_1 *= 100.0 / n;
  report.averages.f1_at_3 *= 100.0 / n;
  report.averages.mrr_at_10 *= 100.0 / n;
  report.averages.ndcg_at_10 *= 100.0 / n;
  return report;
}

std::string format_report_table(const EvalReport& report, std::string_view label) {
  const std::size_t width = std::max<std::size_t>(label.size(), 5);
  auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::ostringstream out;
  out << pad("Model", width) << " | " << pad("P@1", 6) << " | " << pad("F1@3", 6) << " | " << pad("MRR@10", 6) << " | "
      << "NDCG@10\n";
  out << std::string(width, '-') << "-+-" << std::string(6, '-') << "-+-" << std::string(6, '-') << "-+-"
      << std::string(6, '-') << "-+-" << std::string(7, '-') << "\n";
  out << pad(std::string(label), width) << " | " << pad(cell(report.averages.p_at_1), 6) << " | "
      << pad(cell(report.averages.f1_at_3), 6) << " | " << pad(cell(report.averages.mrr_at_10), 6) << " | "
      << cell(report.averages.ndcg_at_10) << "\n";
  out << "(" << report.item_count << " items)\n";
  return out.str();
}

}  // namespace clozegen
