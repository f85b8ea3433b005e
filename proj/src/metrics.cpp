#include "mot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

namespace mot {
namespace {

double bev_distance(const Box3D& a, const Box3D& b) {
  const double dx = a.center.x() - b.center.x();
  const double dy = a.center.y() - b.center.y();
  return std::hypot(dx, dy);
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace

std::vector<EvalBox> eval_boxes_from_tracks(const TrackResult& result) {
  std::vector<EvalBox> out;
  for (const Trajectory& track : result.tracks) {
    for (const TrackOutputBox& entry : track.history) {
      EvalBox box;
      box.frame_index = entry.frame_index;
      box.id = track.id;
      box.class_id = track.class_id;
      box.box = entry.box;
      box.score = entry.confidence;
      out.push_back(box);
    }
  }
  return out;
}

std::vector<EvalBox> eval_boxes_from_scenario(const Scenario& scenario) {
  std::vector<EvalBox> out;
  for (const ScenarioFrame& frame : scenario.frames) {
    for (const AnnotationBox& gt : frame.ground_truth) {
      EvalBox box;
      box.frame_index = frame.frame_index;
      box.id = gt.instance_id;
      box.class_id = gt.class_id;
      box.box = gt.box;
      box.score = 1.0;
      out.push_back(box);
    }
  }
  return out;
}

MatchResult match_for_eval(const std::vector<EvalBox>& predictions,
                           const std::vector<EvalBox>& ground_truth,
                           double dist_gate) {
  MatchResult result;

  std::map<int, std::vector<const EvalBox*>> preds_by_frame;
  std::map<int, std::vector<const EvalBox*>> gts_by_frame;
  for (const EvalBox& p : predictions) preds_by_frame[p.frame_index].push_back(&p);
  for (const EvalBox& g : ground_truth) gts_by_frame[g.frame_index].push_back(&g);

  std::set<int> frames;
  for (const auto& [f, _] : preds_by_frame) frames.insert(f);
  for (const auto& [f, _] : gts_by_frame) frames.insert(f);

  // Last prediction id each ground-truth instance matched, keyed by
  // (class, instance); persists across frames so gaps still count a switch.
  std::map<std::pair<int, int>, int> last_match;

  double distance_sum = 0.0;
  for (int frame : frames) {
    const auto& preds = preds_by_frame[frame];
    const auto& gts = gts_by_frame[frame];

    struct Candidate {
      double distance;
      int gt_index;
      int pred_index;
    };
    std::vector<Candidate> candidates;
    for (int gi = 0; gi < static_cast<int>(gts.size()); ++gi) {
      for (int pi = 0; pi < static_cast<int>(preds.size()); ++pi) {
        if (gts[gi]->class_id != preds[pi]->class_id) continue;
        const double d = bev_distance(gts[gi]->box, preds[pi]->box);
        if (d <= dist_gate) candidates.push_back({d, gi, pi});
      }
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](const Candidate& a, const Candidate& b) {
                if (a.distance != b.distance) return a.distance < b.distance;
                if (gts[a.gt_index]->id != gts[b.gt_index]->id)
                  return gts[a.gt_index]->id < gts[b.gt_index]->id;
                return preds[a.pred_index]->id < preds[b.pred_index]->id;
              });

    std::vector<char> gt_used(gts.size(), 0);
    std::vector<char> pred_used(preds.size(), 0);
    for (const Candidate& c : candidates) {
      if (gt_used[c.gt_index] || pred_used[c.pred_index]) continue;
      gt_used[c.gt_index] = 1;
      pred_used[c.pred_index] = 1;

      const EvalBox& gt = *gts[c.gt_index];
      const EvalBox& pred = *preds[c.pred_index];
      const std::pair<int, int> key{gt.class_id, gt.id};
      auto it = last_match.find(key);
      if (it != last_match.end() && it->second != pred.id) ++result.id_switches;
      last_match[key] = pred.id;

      result.matches.push_back({frame, gt.id, pred.id, c.distance});
      distance_sum += c.distance;
    }
    for (char used : pred_used)
      if (!used) ++result.false_positives;
    for (char used : gt_used)
      if (!used) ++result.false_negatives;
  }

  if (!result.matches.empty())
    result.mean_matched_distance = distance_sum / static_cast<double>(result.matches.size());
  return result;
}

void validate(const EvalConfig& config) {
  if (config.recall_levels < 1)
    throw std::invalid_argument("invalid eval config field: recall_levels");
  if (config.dist_gate <= 0.0)
    throw std::invalid_argument("invalid eval config field: dist_gate");
}

EvalReport evaluate(const std::vector<EvalBox>& predictions,
                    const std::vector<EvalBox>& ground_truth,
                    const EvalConfig& config) {
  validate(config);

  EvalReport report;

  std::set<int> gt_classes;
  for (const EvalBox& g : ground_truth) gt_classes.insert(g.class_id);
  std::set<int> pred_classes;
  for (const EvalBox& p : predictions) pred_classes.insert(p.class_id);
  for (int c : pred_classes)
    if (!gt_classes.count(c)) report.skipped_classes.push_back(c);

  const int levels = config.recall_levels;
  for (int class_id : gt_classes) {
    std::vector<EvalBox> gts;
    for (const EvalBox& g : ground_truth)
      if (g.class_id == class_id) gts.push_back(g);
    std::vector<EvalBox> preds;
    for (const EvalBox& p : predictions)
      if (p.class_id == class_id) preds.push_back(p);

    ClassEval eval;
    eval.class_id = class_id;
    eval.gt_count = static_cast<int>(gts.size());
    const int total = eval.gt_count;

    // Evaluate the matcher once per candidate score cut, highest first.
    std::set<double, std::greater<double>> cuts;
    for (const EvalBox& p : preds) cuts.insert(p.score);
    struct CutStats {
      double threshold;
      MatchResult stats;
    };
    std::vector<CutStats> by_cut;
    for (double cut : cuts) {
      std::vector<EvalBox> kept;
      for (const EvalBox& p : preds)
        if (p.score >= cut) kept.push_back(p);
      by_cut.push_back({cut, match_for_eval(kept, gts, config.dist_gate)});
    }

    for (int level = 1; level <= levels; ++level) {
      ThresholdRow row;
      row.recall_target = static_cast<double>(level) / levels;

      // Largest cut whose matching reaches the target recall; the integer
      // comparison tp * levels >= level * total avoids rounding at the edge.
      const CutStats* chosen = nullptr;
      for (const CutStats& cs : by_cut) {
        const long long tp = cs.stats.matches.size();
        if (tp * levels >= static_cast<long long>(level) * total) {
          chosen = &cs;
          break;
        }
      }
      if (chosen != nullptr && total > 0) {
        const MatchResult& m = chosen->stats;
        row.achievable = true;
        row.threshold = chosen->threshold;
        row.tp = static_cast<int>(m.matches.size());
        row.fp = m.false_positives;
        row.fn = m.false_negatives;
        row.ids = m.id_switches;
        row.mean_distance = m.mean_matched_distance;
        const double r = row.recall_target;
        const double raw =
            1.0 - (row.ids + row.fp + row.fn - (1.0 - r) * total) / (r * total);
        row.motar = std::clamp(raw, 0.0, 1.0);
      }
      eval.rows.push_back(row);
    }

    int achievable = 0;
    double motar_sum = 0.0;
    double dist_sum = 0.0;
    const ThresholdRow* best = nullptr;
    for (const ThresholdRow& row : eval.rows) {
      if (!row.achievable) continue;
      ++achievable;
      motar_sum += row.motar;
      dist_sum += row.mean_distance;
      if (best == nullptr || row.motar >= best->motar) best = &row;
    }
    if (achievable > 0) {
      eval.amota = motar_sum / achievable;
      eval.amotp = dist_sum / achievable;
      eval.ids = best->ids;
    }
    report.classes.push_back(std::move(eval));
  }

  if (!report.classes.empty()) {
    double amota_sum = 0.0, amotp_sum = 0.0;
    for (const ClassEval& c : report.classes) {
      amota_sum += c.amota;
      amotp_sum += c.amotp;
      report.ids += c.ids;
    }
    report.amota = amota_sum / static_cast<double>(report.classes.size());
    report.amotp = amotp_sum / static_cast<double>(report.classes.size());
  }
  return report;
}

std::string report_text(const EvalReport& report) {
  std::string out = "tracking evaluation\n";
  out += "  aggregate: amota=" + format_double(report.amota, 6) +
         " amotp=" + format_double(report.amotp, 6) +
         " ids=" + std::to_string(report.ids) +
         " classes=" + std::to_string(report.classes.size()) + "\n";
  if (!report.skipped_classes.empty()) {
    out += "  skipped (no ground truth): class";
    for (int c : report.skipped_classes) out += " " + std::to_string(c);
    out += "\n";
  }
  for (const ClassEval& c : report.classes) {
    out += "  class " + std::to_string(c.class_id) + ": amota=" +
           format_double(c.amota, 6) + " amotp=" + format_double(c.amotp, 6) +
           " ids=" + std::to_string(c.ids) + " gt=" + std::to_string(c.gt_count) +
           "\n";
    for (const ThresholdRow& row : c.rows) {
      out += "    r=" + format_double(row.recall_target, 2);
      if (!row.achievable) {
        out += " unachievable\n";
        continue;
      }
      out += " cut=" + format_double(row.threshold, 4) +
             " tp=" + std::to_string(row.tp) + " fp=" + std::to_string(row.fp) +
             " fn=" + std::to_string(row.fn) + " ids=" + std::to_string(row.ids) +
             " motar=" + format_double(row.motar, 6) +
             " dist=" + format_double(row.mean_distance, 4) + "\n";
    }
  }
  return out;
}

std::string report_csv(const EvalReport& report) {
  std::string out =
      "class,recall_target,achievable,threshold,tp,fp,fn,ids,motar,mean_distance\n";
  for (const ClassEval& c : report.classes) {
    for (const ThresholdRow& row : c.rows) {
      out += std::to_string(c.class_id) + "," +
             format_double(row.recall_target, 2) + "," +
             (row.achievable ? "1" : "0") + "," +
             format_double(row.threshold, 6) + "," + std::to_string(row.tp) +
             "," + std::to_string(row.fp) + "," + std::to_string(row.fn) + "," +
             std::to_string(row.ids) + "," + format_double(row.motar, 6) + "," +
             format_double(row.mean_distance, 6) + "\n";
    }
  }
  return out;
}

}  // namespace mot
