#include <algorithm>
#include <iomanip>
#include <sstream>

#include "assist/harness.h"

namespace assist {

std::vector<StackingCell> compare_stacking(const CompareConfig& config) {
  std::vector<StackingCell> cells;
  for (const StackingSpec& spec : config.cells) {
    ExperimentConfig exp = config.experiment;
    exp.stacking = spec;
    exp.output.clear();
    const bool single_base = spec.base.size() == 1;
    if (single_base) exp.learners = {spec.base[0]};
    const Report report = run_experiment(exp);

    StackingCell cell;
    cell.base = spec.base[0].to_string();
    for (std::size_t i = 1; i < spec.base.size(); ++i) cell.base += "+" + spec.base[i].to_string();
    cell.meta = spec.meta.to_string();
    std::vector<double> stacked;
    std::vector<double> assisted;
    for (const ReplicationReport& r : report.replications) {
      stacked.push_back(r.stacking->test_rmse);
      assisted.push_back(r.at_stopping_round.test_rmse);
    }
    cell.stacking = mean_se(stacked);
    if (single_base) cell.assisted = mean_se(assisted);
    cells.push_back(std::move(cell));
  }
  return cells;
}

Json stacking_table_json(const std::vector<StackingCell>& cells) {
  Json out = Json::array();
  for (const StackingCell& c : cells) {
    Json j = {{"base", c.base},
              {"meta", c.meta},
              {"stacking", {{"mean", c.stacking.mean}, {"se", c.stacking.se}}}};
    if (c.assisted) j["assisted"] = {{"mean", c.assisted->mean}, {"se", c.assisted->se}};
    out.push_back(std::move(j));
  }
  return out;
}

std::string stacking_table_text(const std::vector<StackingCell>& cells) {
  std::size_t base_w = 4, meta_w = 4;
  for (const StackingCell& c : cells) {
    base_w = std::max(base_w, c.base.size());
    meta_w = std::max(meta_w, c.meta.size());
  }
  const int bw = static_cast<int>(base_w + 2), mw = static_cast<int>(meta_w + 2);
  std::ostringstream out;
  out << std::left << std::setw(bw) << "base" << std::setw(mw) << "meta" << std::setw(20)
      << "stacking" << "assisted\n";
  out << std::fixed << std::setprecision(3);
  for (const StackingCell& c : cells) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << c.stacking.mean << " (" << c.stacking.se << ")";
    out << std::setw(bw) << c.base << std::setw(mw) << c.meta << std::setw(20) << s.str();
    if (c.assisted) {
      out << c.assisted->mean << " (" << c.assisted->se << ")";
    } else {
      out << "-";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace assist
