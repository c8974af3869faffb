#include "aps/jsonl.hpp"

#include "aps/error.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace aps {

namespace {

using nlohmann::json;

json parse_line(const std::string& line, const std::string& path, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io,
                path + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

// Applies fn to every non-blank line of the file.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(parse_line(line, path, lineno), lineno);
  }
}

PropositionSet propositions_from_json(const json& j, const std::string& where) {
  const bool grouped = j.value("grouped", false);
  if (!j.contains("propositions")) return {};
  const json& props = j["propositions"];
  if (!props.is_array())
    throw Error(ErrorCode::Io, where + ": propositions must be an array");
  if (props.empty()) return {};
  if (grouped || (props[0].is_array())) {
    std::vector<std::vector<std::string>> groups;
    for (const auto& group : props) {
      if (!group.is_array())
        throw Error(ErrorCode::Io, where + ": grouped propositions must nest arrays");
      std::vector<std::string> texts;
      for (const auto& p : group) texts.push_back(p.get<std::string>());
      groups.push_back(std::move(texts));
    }
    return PropositionSet::grouped(std::move(groups));
  }
  std::vector<std::string> texts;
  for (const auto& p : props) texts.push_back(p.get<std::string>());
  return PropositionSet::ungrouped(std::move(texts));
}

json propositions_to_json(const PropositionSet& set) {
  json out = json::array();
  if (set.mode == GroupingMode::Grouped) {
    for (const auto& group : set.groups) {
      json g = json::array();
      for (const auto& prop : group) g.push_back(prop.text);
      out.push_back(std::move(g));
    }
  } else {
    for (const auto& prop : set.flatten()) out.push_back(prop.text);
  }
  return out;
}

}  // namespace

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp);
    out << content;
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp + " to " + path);
}

std::vector<DatasetExample> read_dataset_jsonl(const std::string& path) {
  std::vector<DatasetExample> out;
  for_each_line(path, [&](const json& j, std::size_t lineno) {
    const std::string where = path + ":" + std::to_string(lineno);
    DatasetExample example;
    if (!j.contains("id") || !j.contains("text"))
      throw Error(ErrorCode::Io, where + ": record needs id and text");
    example.passage =
        make_passage(j["id"].get<std::string>(), j["text"].get<std::string>());
    example.gold = propositions_from_json(j, where);
    if (j.contains("meta"))
      for (const auto& [key, value] : j["meta"].items())
        example.meta[key] = value.get<std::string>();
    out.push_back(std::move(example));
  });
  return out;
}

std::string dataset_example_to_json(const DatasetExample& example) {
  json j;
  j["id"] = example.passage.id;
  j["text"] = example.passage.text;
  j["propositions"] = propositions_to_json(example.gold);
  j["grouped"] = example.gold.mode == GroupingMode::Grouped;
  j["meta"] = json::object();
  for (const auto& [key, value] : example.meta) j["meta"][key] = value;
  return j.dump();
}

void write_dataset_jsonl(const std::string& path,
                         const std::vector<DatasetExample>& examples) {
  std::string content;
  for (const auto& example : examples)
    content += dataset_example_to_json(example) + "\n";
  atomic_write_text(path, content);
}

std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path) {
  std::vector<PredictionRecord> out;
  for_each_line(path, [&](const json& j, std::size_t lineno) {
    const std::string where = path + ":" + std::to_string(lineno);
    if (!j.contains("id"))
      throw Error(ErrorCode::Io, where + ": prediction needs an id");
    out.push_back(
        {j["id"].get<std::string>(), propositions_from_json(j, where)});
  });
  return out;
}

void write_predictions_jsonl(const std::string& path,
                             const std::vector<PredictionRecord>& predictions) {
  std::string content;
  for (const auto& record : predictions) {
    json j;
    j["id"] = record.id;
    j["propositions"] = propositions_to_json(record.propositions);
    j["grouped"] = record.propositions.mode == GroupingMode::Grouped;
    content += j.dump() + "\n";
  }
  atomic_write_text(path, content);
}

void write_training_jsonl(const std::string& path,
                          const std::vector<TrainingRecord>& records) {
  std::string content;
  for (const auto& record : records) {
    json j;
    j["input"] = record.input_text;
    j["target"] = record.target_text;
    j["mode"] = record.mode == GroupingMode::Grouped ? "grouped" : "ungrouped";
    j["source_id"] = record.source_id;
    content += j.dump() + "\n";
  }
  atomic_write_text(path, content);
}

std::vector<TrainingRecord> read_training_jsonl(const std::string& path) {
  std::vector<TrainingRecord> out;
  for_each_line(path, [&](const json& j, std::size_t) {
    TrainingRecord record;
    record.input_text = j.at("input").get<std::string>();
    record.target_text = j.at("target").get<std::string>();
    record.mode = j.value("mode", "ungrouped") == "grouped"
                      ? GroupingMode::Grouped
                      : GroupingMode::Ungrouped;
    record.source_id = j.value("source_id", "");
    out.push_back(std::move(record));
  });
  return out;
}

std::vector<SeedExample> read_seeds_jsonl(const std::string& path) {
  std::vector<SeedExample> out;
  for_each_line(path, [&](const json& j, std::size_t lineno) {
    const std::string where = path + ":" + std::to_string(lineno);
    SeedExample seed;
    seed.domain = j.at("domain").get<std::string>();
    auto length = parse_text_length(j.at("length").get<std::string>());
    if (!length)
      throw Error(ErrorCode::Io, where + ": length must be short or paragraph");
    seed.length = *length;
    seed.text = j.at("text").get<std::string>();
    if (seed.domain.empty() || seed.text.empty())
      throw Error(ErrorCode::Io, where + ": domain and text must be non-empty");
    out.push_back(std::move(seed));
  });
  return out;
}

void write_generated_jsonl(const std::string& path,
                           const std::vector<GeneratedText>& texts) {
  std::string content;
  for (const auto& t : texts) {
    json j;
    j["domain"] = t.domain;
    j["length"] = text_length_name(t.length);
    j["index"] = t.index;
    j["text"] = t.text;
    content += j.dump() + "\n";
  }
  atomic_write_text(path, content);
}

std::vector<GeneratedText> read_generated_jsonl(const std::string& path) {
  std::vector<GeneratedText> out;
  for_each_line(path, [&](const json& j, std::size_t lineno) {
    const std::string where = path + ":" + std::to_string(lineno);
    GeneratedText t;
    t.domain = j.at("domain").get<std::string>();
    auto length = parse_text_length(j.at("length").get<std::string>());
    if (!length)
      throw Error(ErrorCode::Io, where + ": length must be short or paragraph");
    t.length = *length;
    t.index = j.value("index", std::size_t{0});
    t.text = j.at("text").get<std::string>();
    out.push_back(std::move(t));
  });
  return out;
}

}  // namespace aps
