#include "sde/compare.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "sde/error.hpp"
#include "sde/util.hpp"

namespace sde {

using nlohmann::json;

RunSummaryRef make_summary_ref(const GeometrySummary& summary,
                               const std::string& label) {
  RunSummaryRef ref;
  ref.label = label.empty()
                  ? summary.actor_model + "/" + to_string(summary.readout)
                  : label;
  ref.layer_geometry = summary.layer_geometry();
  ref.suite_id = summary.suite_id;
  ref.actor_model = summary.actor_model;
  ref.readout = summary.readout;
  return ref;
}

namespace {

void check_same_suite(const std::vector<RunSummaryRef>& summaries) {
  for (const auto& summary : summaries)
    if (summary.suite_id != summaries.front().suite_id)
      throw SdeError(ErrorCode::SuiteMismatch,
                     summary.label + " covers suite " + summary.suite_id +
                         ", expected " + summaries.front().suite_id);
}

ComparisonRow to_row(const RunSummaryRef& summary) {
  return {summary.label, summary.layer_geometry.surface_mean,
          summary.layer_geometry.structural_mean,
          summary.layer_geometry.conditional_mean};
}

GeometryComparison build_comparison(const std::vector<RunSummaryRef>& summaries,
                                    std::size_t baseline_index) {
  GeometryComparison comparison;
  comparison.suite_id = summaries.front().suite_id;
  comparison.baseline_label = summaries[baseline_index].label;
  for (const auto& summary : summaries) comparison.rows.push_back(to_row(summary));
  if (summaries.size() > 1) {
    const ComparisonRow base = comparison.rows[baseline_index];
    for (const auto& row : comparison.rows)
      comparison.deltas.push_back({row.label, row.surface - base.surface,
                                   row.structural - base.structural,
                                   row.conditional - base.conditional});
  }
  return comparison;
}

}  // namespace

GeometryComparison compare_readouts(const std::vector<RunSummaryRef>& summaries,
                                    const std::string& baseline_label) {
  if (summaries.size() < 2)
    throw SdeError(ErrorCode::EmptyInput, "readout comparison needs >= 2 summaries");
  check_same_suite(summaries);
  auto it = std::find_if(summaries.begin(), summaries.end(),
                         [&](const RunSummaryRef& summary) {
                           return summary.label == baseline_label;
                         });
  if (it == summaries.end())
    throw SdeError(ErrorCode::UnknownBaseline, baseline_label);
  return build_comparison(summaries,
                          static_cast<std::size_t>(it - summaries.begin()));
}

GeometryComparison compare_models(const std::vector<RunSummaryRef>& summaries) {
  if (summaries.empty())
    throw SdeError(ErrorCode::EmptyInput, "model comparison needs >= 1 summary");
  check_same_suite(summaries);
  for (const auto& summary : summaries)
    if (summary.readout != summaries.front().readout)
      throw SdeError(ErrorCode::ReadoutMismatch,
                     summary.label + " uses readout " +
                         to_string(summary.readout) + ", expected " +
                         to_string(summaries.front().readout));
  return build_comparison(summaries, 0);
}

RewriteDelta structural_rewrite_delta(
    const std::map<std::string, double>& base_structural,
    const std::map<std::string, double>& rewrite_structural,
    const std::vector<std::string>& subset, double change_min) {
  RewriteDelta delta;
  delta.subset_family_ids = subset;
  delta.change_min = change_min;
  for (const auto& family_id : subset) {
    auto base = base_structural.find(family_id);
    if (base == base_structural.end())
      throw SdeError(ErrorCode::MissingFamily, family_id + " (canonical run)");
    auto rewrite = rewrite_structural.find(family_id);
    if (rewrite == rewrite_structural.end())
      throw SdeError(ErrorCode::MissingFamily, family_id + " (rewrite run)");
    delta.pairs.emplace_back(family_id, base->second, rewrite->second);
    if (std::fabs(base->second - rewrite->second) >= change_min)
      ++delta.changed_count;
  }
  return delta;
}

std::map<std::string, double> structural_values(const GeometrySummary& summary) {
  std::map<std::string, double> values;
  for (const auto& geometry : summary.family_geometries)
    values[geometry.family_id] = geometry.structural_pas;
  return values;
}

namespace {

std::string pad(const std::string& text, std::size_t width) {
  return text.size() >= width ? text : text + std::string(width - text.size(), ' ');
}

std::string lead(const std::string& text, std::size_t width) {
  return text.size() >= width ? text : std::string(width - text.size(), ' ') + text;
}

}  // namespace

std::string render_comparison_table(const GeometryComparison& comparison) {
  std::size_t label_width = 8;
  for (const auto& row : comparison.rows)
    label_width = std::max(label_width, row.label.size());

  std::ostringstream out;
  out << pad("", label_width) << "  " << lead("surface", 10)
      << lead("structural", 12) << lead("conditional", 13) << "\n";
  for (const auto& row : comparison.rows) {
    out << pad(row.label, label_width) << "  " << lead(render3(row.surface), 10)
        << lead(render3(row.structural), 12) << lead(render3(row.conditional), 13)
        << "\n";
  }
  if (!comparison.deltas.empty()) {
    out << "deltas vs " << comparison.baseline_label << ":\n";
    for (const auto& row : comparison.deltas) {
      out << pad(row.label, label_width) << "  " << lead(render3(row.surface), 10)
          << lead(render3(row.structural), 12)
          << lead(render3(row.conditional), 13) << "\n";
    }
  }
  return out.str();
}

std::string render_rewrite_delta(const RewriteDelta& delta) {
  std::ostringstream out;
  std::size_t label_width = 8;
  for (const auto& [family_id, base, rewrite] : delta.pairs)
    label_width = std::max(label_width, family_id.size());
  out << pad("family", label_width) << "  " << lead("canonical", 10)
      << lead("rewrite", 10) << lead("moved", 7) << "\n";
  for (const auto& [family_id, base, rewrite] : delta.pairs) {
    const bool moved = std::fabs(base - rewrite) >= delta.change_min;
    out << pad(family_id, label_width) << "  " << lead(render3(base), 10)
        << lead(render3(rewrite), 10) << lead(moved ? "yes" : "no", 7) << "\n";
  }
  out << "structural PAS changed in " << delta.changed_count << "/"
      << delta.pairs.size() << " families (change_min " << render3(delta.change_min)
      << ")\n";
  return out.str();
}

std::string serialize_comparison(const GeometryComparison& comparison,
                                 const std::string& mode) {
  json doc;
  doc["mode"] = mode;
  doc["suite_id"] = comparison.suite_id;
  doc["baseline"] = comparison.baseline_label;
  json rows = json::array();
  for (const auto& row : comparison.rows)
    rows.push_back({{"label", row.label},
                    {"surface", row.surface},
                    {"structural", row.structural},
                    {"conditional", row.conditional}});
  doc["rows"] = std::move(rows);
  json deltas = json::array();
  for (const auto& row : comparison.deltas)
    deltas.push_back({{"label", row.label},
                      {"surface", row.surface},
                      {"structural", row.structural},
                      {"conditional", row.conditional}});
  doc["deltas"] = std::move(deltas);
  doc["text_table"] = render_comparison_table(comparison);
  return doc.dump(2) + "\n";
}

std::string serialize_rewrite_delta(const RewriteDelta& delta) {
  json doc;
  doc["mode"] = "rewrite";
  doc["subset_family_ids"] = delta.subset_family_ids;
  doc["change_min"] = delta.change_min;
  doc["changed_count"] = delta.changed_count;
  json pairs = json::array();
  for (const auto& [family_id, base, rewrite] : delta.pairs)
    pairs.push_back({{"family_id", family_id},
                     {"canonical", base},
                     {"rewrite", rewrite}});
  doc["pairs"] = std::move(pairs);
  doc["text_table"] = render_rewrite_delta(delta);
  return doc.dump(2) + "\n";
}

GeometryComparison load_comparison(const std::string& path, std::string* mode_out) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::ParseError, path + ": " + e.what());
  }
  GeometryComparison comparison;
  try {
    if (mode_out != nullptr) *mode_out = doc.value("mode", "readouts");
    comparison.suite_id = doc.value("suite_id", "");
    comparison.baseline_label = doc.value("baseline", "");
    for (const auto& node : doc.at("rows"))
      comparison.rows.push_back({node.at("label").get<std::string>(),
                                 node.at("surface").get<double>(),
                                 node.at("structural").get<double>(),
                                 node.at("conditional").get<double>()});
    if (doc.contains("deltas"))
      for (const auto& node : doc["deltas"])
        comparison.deltas.push_back({node.at("label").get<std::string>(),
                                     node.at("surface").get<double>(),
                                     node.at("structural").get<double>(),
                                     node.at("conditional").get<double>()});
  } catch (const json::exception& e) {
    throw SdeError(ErrorCode::SchemaError, path + ": " + e.what());
  }
  return comparison;
}

RewriteDelta load_rewrite_delta(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::ParseError, path + ": " + e.what());
  }
  RewriteDelta delta;
  try {
    delta.subset_family_ids =
        doc.at("subset_family_ids").get<std::vector<std::string>>();
    delta.change_min = doc.at("change_min").get<double>();
    delta.changed_count = doc.at("changed_count").get<int>();
    for (const auto& node : doc.at("pairs"))
      delta.pairs.emplace_back(node.at("family_id").get<std::string>(),
                               node.at("canonical").get<double>(),
                               node.at("rewrite").get<double>());
  } catch (const json::exception& e) {
    throw SdeError(ErrorCode::SchemaError, path + ": " + e.what());
  }
  return delta;
}

}  // namespace sde
