#include "sde/suite.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <regex>
#include <set>

#include <json.hpp>

#include "sde/util.hpp"

namespace sde {

using nlohmann::json;

const char* to_string(Layer layer) {
  switch (layer) {
    case Layer::Surface: return "surface";
    case Layer::Structural: return "structural";
    case Layer::Conditional: return "conditional";
    case Layer::Meta: return "meta";
  }
  return "?";
}

const char* to_string(Variant variant) {
  return variant == Variant::Support ? "support" : "counter";
}

const char* to_string(Side side) {
  switch (side) {
    case Side::A: return "A";
    case Side::B: return "B";
    case Side::None: return "none";
  }
  return "?";
}

const char* to_string(SuiteKind kind) {
  switch (kind) {
    case SuiteKind::Full32: return "full32";
    case SuiteKind::Controversial20: return "controversial20";
    case SuiteKind::Subset: return "subset";
  }
  return "?";
}

Layer layer_from_string(const std::string& s) {
  if (s == "surface") return Layer::Surface;
  if (s == "structural") return Layer::Structural;
  if (s == "conditional") return Layer::Conditional;
  if (s == "meta") return Layer::Meta;
  throw SdeError(ErrorCode::EnumError, "layer: " + s);
}

Variant variant_from_string(const std::string& s) {
  if (s == "support") return Variant::Support;
  if (s == "counter") return Variant::Counter;
  throw SdeError(ErrorCode::EnumError, "variant: " + s);
}

Side side_from_string(const std::string& s) {
  if (s == "A") return Side::A;
  if (s == "B") return Side::B;
  if (s == "none") return Side::None;
  throw SdeError(ErrorCode::EnumError, "side: " + s);
}

SuiteKind suite_kind_from_string(const std::string& s) {
  if (s == "full32") return SuiteKind::Full32;
  if (s == "controversial20") return SuiteKind::Controversial20;
  if (s == "subset") return SuiteKind::Subset;
  throw SdeError(ErrorCode::EnumError, "suite kind: " + s);
}

const PromptRecord* Family::find(Layer layer, std::optional<Variant> variant,
                                 Side side) const {
  const PromptRecord* found = nullptr;
  for (const auto& record : records) {
    if (record.layer == layer && record.variant == variant &&
        record.side == side) {
      if (found != nullptr) return nullptr;
      found = &record;
    }
  }
  return found;
}

int Suite::prompt_count() const {
  int count = 0;
  for (const auto& family : families)
    count += static_cast<int>(family.records.size());
  return count;
}

const Family* Suite::find_family(const std::string& family_id) const {
  for (const auto& family : families)
    if (family.family_id == family_id) return &family;
  return nullptr;
}

namespace {

std::string require_string(const json& node, const char* key,
                           const std::string& path) {
  if (!node.contains(key))
    throw SdeError(ErrorCode::SchemaError, path + " missing field '" + key + "'");
  if (!node[key].is_string())
    throw SdeError(ErrorCode::SchemaError, path + " field '" + key + "' must be a string");
  return node[key].get<std::string>();
}

std::string optional_string(const json& node, const char* key,
                            const std::string& path) {
  if (!node.contains(key)) return {};
  if (!node[key].is_string())
    throw SdeError(ErrorCode::SchemaError, path + " field '" + key + "' must be a string");
  return node[key].get<std::string>();
}

const json& require_array(const json& node, const char* key,
                          const std::string& path) {
  if (!node.contains(key))
    throw SdeError(ErrorCode::SchemaError, path + " missing field '" + key + "'");
  if (!node[key].is_array())
    throw SdeError(ErrorCode::SchemaError, path + " field '" + key + "' must be an array");
  return node[key];
}

Condition parse_condition(const json& node, const std::string& path) {
  Condition condition;
  condition.axis_id = require_string(node, "axis_id", path);
  condition.statement = require_string(node, "statement", path);
  condition.registry_item_id = optional_string(node, "registry_item_id", path);
  condition.source_anchor = optional_string(node, "source_anchor", path);
  return condition;
}

PromptRecord parse_record(const json& node, const std::string& path) {
  PromptRecord record;
  record.prompt_id = require_string(node, "prompt_id", path);
  record.family_id = optional_string(node, "family_id", path);
  record.layer = layer_from_string(require_string(node, "layer", path));
  if (node.contains("variant") && !node["variant"].is_null())
    record.variant = variant_from_string(require_string(node, "variant", path));
  record.side = side_from_string(require_string(node, "side", path));
  record.text = require_string(node, "text", path);
  if (node.contains("conditions")) {
    const json& conditions = require_array(node, "conditions", path);
    for (std::size_t i = 0; i < conditions.size(); ++i)
      record.conditions.push_back(parse_condition(
          conditions[i], path + ".conditions[" + std::to_string(i) + "]"));
  }
  if (node.contains("group_labels")) {
    const json& labels = require_array(node, "group_labels", path);
    for (const auto& label : labels) {
      if (!label.is_string())
        throw SdeError(ErrorCode::SchemaError, path + " group_labels entries must be strings");
      record.group_labels.push_back(label.get<std::string>());
    }
  }
  return record;
}

}  // namespace

Suite parse_suite(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::ParseError, origin + ": " + e.what());
  }
  if (!doc.is_object())
    throw SdeError(ErrorCode::SchemaError, origin + ": top level must be an object");

  Suite suite;
  suite.suite_id = require_string(doc, "suite_id", origin);
  suite.kind = suite_kind_from_string(require_string(doc, "kind", origin));
  suite.version = require_string(doc, "version", origin);
  const json& families = require_array(doc, "families", origin);
  for (std::size_t f = 0; f < families.size(); ++f) {
    const std::string fpath = "families[" + std::to_string(f) + "]";
    const json& fnode = families[f];
    Family family;
    family.family_id = require_string(fnode, "family_id", fpath);
    family.phenomenon = require_string(fnode, "phenomenon", fpath);
    family.axis = require_string(fnode, "axis", fpath);
    family.domain_tag = require_string(fnode, "domain_tag", fpath);
    const json& records = require_array(fnode, "records", fpath);
    for (std::size_t r = 0; r < records.size(); ++r) {
      PromptRecord record = parse_record(
          records[r], fpath + ".records[" + std::to_string(r) + "]");
      if (record.family_id.empty()) record.family_id = family.family_id;
      family.records.push_back(std::move(record));
    }
    suite.families.push_back(std::move(family));
  }
  return suite;
}

Suite load_suite(const std::string& path) {
  return parse_suite(read_file(path), path);
}

namespace {

json condition_to_json(const Condition& condition) {
  json node;
  node["axis_id"] = condition.axis_id;
  node["statement"] = condition.statement;
  if (!condition.registry_item_id.empty())
    node["registry_item_id"] = condition.registry_item_id;
  if (!condition.source_anchor.empty())
    node["source_anchor"] = condition.source_anchor;
  return node;
}

json record_to_json(const PromptRecord& record) {
  json node;
  node["prompt_id"] = record.prompt_id;
  node["family_id"] = record.family_id;
  node["layer"] = to_string(record.layer);
  if (record.variant) node["variant"] = to_string(*record.variant);
  node["side"] = to_string(record.side);
  node["text"] = record.text;
  if (!record.conditions.empty()) {
    json conditions = json::array();
    for (const auto& condition : record.conditions)
      conditions.push_back(condition_to_json(condition));
    node["conditions"] = std::move(conditions);
  }
  if (!record.group_labels.empty()) node["group_labels"] = record.group_labels;
  return node;
}

}  // namespace

std::string serialize_suite(const Suite& suite) {
  json doc;
  doc["suite_id"] = suite.suite_id;
  doc["kind"] = to_string(suite.kind);
  doc["version"] = suite.version;
  json families = json::array();
  for (const auto& family : suite.families) {
    json fnode;
    fnode["family_id"] = family.family_id;
    fnode["phenomenon"] = family.phenomenon;
    fnode["axis"] = family.axis;
    fnode["domain_tag"] = family.domain_tag;
    json records = json::array();
    for (const auto& record : family.records)
      records.push_back(record_to_json(record));
    fnode["records"] = std::move(records);
    families.push_back(std::move(fnode));
  }
  doc["families"] = std::move(families);
  return doc.dump(2) + "\n";
}

void save_suite(const Suite& suite, const std::string& path) {
  write_file(path, serialize_suite(suite));
}

namespace {

// The nine cells every valid family partitions into.
struct Cell {
  Layer layer;
  std::optional<Variant> variant;
  Side side;
  const char* name;
};

constexpr int kCellCount = 9;

const std::array<Cell, kCellCount>& family_cells() {
  static const std::array<Cell, kCellCount> cells = {{
      {Layer::Surface, std::nullopt, Side::A, "surface A"},
      {Layer::Surface, std::nullopt, Side::B, "surface B"},
      {Layer::Structural, std::nullopt, Side::A, "structural A"},
      {Layer::Structural, std::nullopt, Side::B, "structural B"},
      {Layer::Conditional, Variant::Support, Side::A, "conditional support A"},
      {Layer::Conditional, Variant::Support, Side::B, "conditional support B"},
      {Layer::Conditional, Variant::Counter, Side::A, "conditional counter A"},
      {Layer::Conditional, Variant::Counter, Side::B, "conditional counter B"},
      {Layer::Meta, std::nullopt, Side::None, "meta"},
  }};
  return cells;
}

void validate_record(const PromptRecord& record, const std::string& path,
                     ValidationReport& report) {
  if (record.prompt_id.empty())
    report.add("EMPTY_FIELD", path, "prompt_id is empty");

  if (record.layer == Layer::Conditional) {
    if (!record.variant)
      report.add("VARIANT_REQUIRED", path, "conditional record has no variant");
  } else if (record.variant) {
    report.add("VARIANT_FORBIDDEN", path,
               std::string("variant on ") + to_string(record.layer) + " record");
  }

  if (record.layer == Layer::Meta) {
    if (record.side != Side::None)
      report.add("BAD_SIDE", path, "meta record must carry side none");
    if (!record.conditions.empty())
      report.add("CONDITIONS_FORBIDDEN", path, "meta record carries conditions");
    if (!record.group_labels.empty())
      report.add("GROUP_LABELS_FORBIDDEN", path, "meta record carries group labels");
  } else {
    if (record.side == Side::None)
      report.add("BAD_SIDE", path,
                 std::string("side none on ") + to_string(record.layer) + " record");
  }

  if (record.layer == Layer::Surface && !record.conditions.empty())
    report.add("CONDITIONS_FORBIDDEN", path, "surface record carries conditions");
  if ((record.layer == Layer::Structural || record.layer == Layer::Conditional) &&
      record.conditions.empty())
    report.add("CONDITIONS_REQUIRED", path,
               std::string(to_string(record.layer)) + " record has no conditions");

  if (record.layer == Layer::Structural && !record.group_labels.empty())
    report.add("GROUP_LABELS_FORBIDDEN", path, "structural record carries group labels");
  if ((record.layer == Layer::Surface || record.layer == Layer::Conditional) &&
      record.group_labels.empty())
    report.add("GROUP_LABELS_REQUIRED", path,
               std::string(to_string(record.layer)) + " record has no group labels");

  for (std::size_t i = 0; i < record.conditions.size(); ++i) {
    const auto& condition = record.conditions[i];
    const std::string cpath = path + ".conditions[" + std::to_string(i) + "]";
    if (condition.axis_id.empty())
      report.add("EMPTY_FIELD", cpath, "axis_id is empty");
    if (condition.statement.empty())
      report.add("EMPTY_FIELD", cpath, "statement is empty");
  }
}

bool record_matches_cell(const PromptRecord& record, const Cell& cell) {
  return record.layer == cell.layer && record.variant == cell.variant &&
         record.side == cell.side;
}

}  // namespace

ValidationReport validate_suite(const Suite& suite) {
  ValidationReport report;
  report.family_count = static_cast<int>(suite.families.size());
  report.prompt_count = suite.prompt_count();

  if (suite.kind == SuiteKind::Full32 && suite.families.size() != 32)
    report.add("WRONG_FAMILY_COUNT", suite.suite_id,
               "full32 suite has " + std::to_string(suite.families.size()) +
                   " families, expected 32");
  if (suite.kind == SuiteKind::Controversial20 && suite.families.size() != 20)
    report.add("WRONG_FAMILY_COUNT", suite.suite_id,
               "controversial20 suite has " + std::to_string(suite.families.size()) +
                   " families, expected 20");
  if (suite.families.empty())
    report.add("EMPTY_SUITE", suite.suite_id, "suite has no families");

  std::map<std::string, std::string> prompt_owner;  // prompt_id -> path
  std::set<std::string> family_ids;

  for (std::size_t f = 0; f < suite.families.size(); ++f) {
    const auto& family = suite.families[f];
    const std::string fpath = "families[" + std::to_string(f) + "]";

    if (!family_ids.insert(family.family_id).second)
      report.add("DUPLICATE_FAMILY_ID", fpath, "family_id '" + family.family_id +
                                                   "' appears more than once");

    for (std::size_t r = 0; r < family.records.size(); ++r) {
      const auto& record = family.records[r];
      const std::string rpath = fpath + ".records[" + std::to_string(r) + "]";
      validate_record(record, rpath, report);

      if (record.family_id != family.family_id)
        report.add("FAMILY_ID_MISMATCH", rpath,
                   "record family_id '" + record.family_id +
                       "' does not match family '" + family.family_id + "'");

      auto [it, inserted] = prompt_owner.emplace(record.prompt_id, rpath);
      if (!inserted && !record.prompt_id.empty())
        report.add("DUPLICATE_PROMPT_ID", rpath,
                   "prompt_id '" + record.prompt_id + "' already used at " +
                       it->second);
    }

    for (const auto& cell : family_cells()) {
      int count = 0;
      for (const auto& record : family.records)
        if (record_matches_cell(record, cell)) ++count;
      if (count == 0)
        report.add("MISSING_RECORD", fpath,
                   std::string("no ") + cell.name + " record");
      else if (count > 1)
        report.add("DUPLICATE_RECORD", fpath,
                   std::string("multiple ") + cell.name + " records");
    }
  }
  return report;
}

namespace {

std::regex build_evidence_regex(const LintOptions& options) {
  std::string alternatives;
  for (const auto& unit : options.evidence_units) {
    if (!alternatives.empty()) alternatives += '|';
    if (unit == "%") {
      alternatives += "%";
    } else {
      std::string escaped;
      for (char c : unit) {
        if (c == ' ') escaped += "\\s+";
        else escaped += c;
      }
      alternatives += "(?:" + escaped + ")\\b";
    }
  }
  return std::regex("[0-9]+(?:\\.[0-9]+)?\\s*(?:" + alternatives + ")",
                    std::regex::ECMAScript | std::regex::icase);
}

}  // namespace

std::vector<Finding> lint_structural_projection(const Family& family,
                                                const LintOptions& options) {
  std::vector<Finding> findings;

  // Labels declared on the family's Surface cells.
  std::vector<std::string> labels;
  for (const auto& record : family.records)
    if (record.layer == Layer::Surface)
      for (const auto& label : record.group_labels)
        if (std::find(labels.begin(), labels.end(), label) == labels.end())
          labels.push_back(label);

  const std::regex evidence = build_evidence_regex(options);

  for (const auto& record : family.records) {
    const std::string& path = record.prompt_id;

    for (const auto& condition : record.conditions) {
      // one condition per axis
      int axis_uses = 0;
      for (const auto& other : record.conditions)
        if (other.axis_id == condition.axis_id) ++axis_uses;
      if (axis_uses > 1) {
        const bool already = std::any_of(
            findings.begin(), findings.end(), [&](const Finding& f) {
              return f.code == "DUPLICATE_AXIS" && f.path == path &&
                     f.message.find("'" + condition.axis_id + "'") != std::string::npos;
            });
        if (!already)
          findings.push_back({"DUPLICATE_AXIS", path,
                              "axis '" + condition.axis_id +
                                  "' used by more than one condition",
                              Severity::Error});
      }
    }

    if (record.layer != Layer::Structural) continue;

    for (const auto& label : labels) {
      bool hit = contains_word_ci(record.text, label);
      for (const auto& condition : record.conditions)
        hit = hit || contains_word_ci(condition.statement, label) ||
              contains_word_ci(condition.axis_id, label);
      if (hit)
        findings.push_back({"GROUP_LABEL_IN_STRUCTURAL", path,
                            "group label '" + label +
                                "' appears in structural text or conditions",
                            Severity::Error});
    }

    for (const auto& condition : record.conditions) {
      if (std::regex_search(condition.statement, evidence)) {
        findings.push_back({"CASE_EVIDENCE_IN_STRUCTURAL", path,
                            "condition on axis '" + condition.axis_id +
                                "' contains case-specific evidence",
                            Severity::Warning});
      }
    }
  }
  return findings;
}

namespace {

int layer_rank(Layer layer) {
  switch (layer) {
    case Layer::Surface: return 0;
    case Layer::Structural: return 1;
    case Layer::Conditional: return 2;
    case Layer::Meta: return 3;
  }
  return 4;
}

int variant_rank(const std::optional<Variant>& variant) {
  if (!variant) return 0;
  return *variant == Variant::Support ? 1 : 2;
}

int side_rank(Side side) {
  switch (side) {
    case Side::A: return 0;
    case Side::B: return 1;
    case Side::None: return 2;
  }
  return 3;
}

}  // namespace

bool record_order_less(const PromptRecord& lhs, const PromptRecord& rhs) {
  if (lhs.family_id != rhs.family_id) return lhs.family_id < rhs.family_id;
  if (layer_rank(lhs.layer) != layer_rank(rhs.layer))
    return layer_rank(lhs.layer) < layer_rank(rhs.layer);
  if (variant_rank(lhs.variant) != variant_rank(rhs.variant))
    return variant_rank(lhs.variant) < variant_rank(rhs.variant);
  return side_rank(lhs.side) < side_rank(rhs.side);
}

}  // namespace sde
