#include "aps/formats.hpp"

#include "aps/error.hpp"

#include <cctype>
#include <vector>

namespace aps {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool all_whitespace(const std::string& s, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i)
    if (!std::isspace(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

void check_config(const FormatConfig& cfg) {
  if (cfg.start_token.empty() || cfg.end_token.empty())
    throw Error(ErrorCode::Config, "format tokens must be non-empty");
  if (cfg.start_token == cfg.end_token)
    throw Error(ErrorCode::Config, "start and end tokens must differ");
  if (cfg.bullet.empty())
    throw Error(ErrorCode::Config, "bullet must be non-empty");
}

void check_renderable(const std::string& text, const FormatConfig& cfg,
                      const char* what) {
  if (text.find('\n') != std::string::npos)
    throw Error(ErrorCode::TokenCollision,
                std::string(what) + " contains a newline: \"" + text + "\"");
  if (text.find(cfg.start_token) != std::string::npos ||
      text.find(cfg.end_token) != std::string::npos)
    throw Error(ErrorCode::TokenCollision,
                std::string(what) + " contains a special token: \"" + text + "\"");
}

std::string bullet_list(const std::vector<Proposition>& props,
                        const FormatConfig& cfg) {
  std::string out;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (i > 0) out += '\n';
    out += cfg.bullet;
    out += props[i].text;
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

// Bullet lines of one group's body; strict=true rejects stray non-blank text.
std::vector<std::string> parse_bullets(const std::string& body,
                                       const FormatConfig& cfg, bool strict,
                                       std::size_t group_index) {
  std::vector<std::string> props;
  for (const auto& line : split_lines(body)) {
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped.rfind(cfg.bullet, 0) == 0) {
      const std::string text = trim(stripped.substr(cfg.bullet.size()));
      if (!text.empty()) props.push_back(text);
      continue;
    }
    if (strict)
      throw Error(ErrorCode::MalformedLine,
                  "group " + std::to_string(group_index) +
                      ": line does not start with \"" + cfg.bullet + "\": \"" +
                      stripped + "\"");
  }
  return props;
}

}  // namespace

std::string render_ungrouped_input(const Passage& passage, const FormatConfig& cfg) {
  return cfg.instruction + "\n" + passage.text;
}

std::string render_grouped_input(const Passage& passage, const FormatConfig& cfg) {
  check_config(cfg);
  std::string out = cfg.instruction + "\n";
  for (const auto& sentence : passage.sentences) {
    check_renderable(sentence.text, cfg, "sentence");
    out += cfg.start_token + sentence.text + cfg.end_token;
  }
  return out;
}

TrainingRecord render_ungrouped(const Passage& passage, const PropositionSet& gold,
                                const FormatConfig& cfg) {
  check_config(cfg);
  const auto props = gold.flatten();
  if (props.empty())
    throw Error(ErrorCode::EmptyGold, "cannot render an empty proposition set");
  for (const auto& prop : props) check_renderable(prop.text, cfg, "proposition");
  TrainingRecord record;
  record.mode = GroupingMode::Ungrouped;
  record.source_id = passage.id;
  record.input_text = render_ungrouped_input(passage, cfg);
  record.target_text = bullet_list(props, cfg);
  return record;
}

TrainingRecord render_grouped(const Passage& passage, const PropositionSet& gold,
                              const FormatConfig& cfg) {
  check_config(cfg);
  if (gold.mode != GroupingMode::Grouped)
    throw Error(ErrorCode::GroupCountMismatch,
                "grouped rendering needs a grouped proposition set");
  if (gold.groups.size() != passage.sentences.size())
    throw Error(ErrorCode::GroupCountMismatch,
                std::to_string(gold.groups.size()) + " groups vs " +
                    std::to_string(passage.sentences.size()) + " sentences");
  for (std::size_t g = 0; g < gold.groups.size(); ++g) {
    if (gold.groups[g].empty())
      throw Error(ErrorCode::EmptyGroup,
                  "group " + std::to_string(g) + " has no propositions");
    for (const auto& prop : gold.groups[g])
      check_renderable(prop.text, cfg, "proposition");
  }

  TrainingRecord record;
  record.mode = GroupingMode::Grouped;
  record.source_id = passage.id;
  record.input_text = render_grouped_input(passage, cfg);
  for (const auto& group : gold.groups)
    record.target_text += cfg.start_token + bullet_list(group, cfg) + cfg.end_token;
  return record;
}

PropositionSet parse_grouped_output(const std::string& raw, std::size_t n_sentences,
                                    const FormatConfig& cfg) {
  check_config(cfg);
  if (n_sentences == 0)
    throw Error(ErrorCode::Config, "n_sentences must be >= 1");

  // Scan the token structure first: groups must strictly alternate
  // start/end with nothing but whitespace between them.
  struct Span {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Span> bodies;
  std::size_t start_count = 0, end_count = 0;
  bool inside = false;
  std::size_t body_begin = 0;
  std::size_t outside_from = 0;
  std::size_t i = 0;
  // Longest-first so a token that prefixes the other is matched correctly.
  const bool start_first = cfg.start_token.size() >= cfg.end_token.size();
  const std::string& first_token = start_first ? cfg.start_token : cfg.end_token;
  const std::string& second_token = start_first ? cfg.end_token : cfg.start_token;
  while (i < raw.size()) {
    const std::string* hit = nullptr;
    if (raw.compare(i, first_token.size(), first_token) == 0)
      hit = &first_token;
    else if (raw.compare(i, second_token.size(), second_token) == 0)
      hit = &second_token;
    if (!hit) {
      ++i;
      continue;
    }
    const bool is_start = (hit == &cfg.start_token);
    if (is_start) {
      ++start_count;
      if (inside)
        throw Error(ErrorCode::UnbalancedTokens,
                    "nested start token at offset " + std::to_string(i));
      if (!all_whitespace(raw, outside_from, i))
        throw Error(ErrorCode::UnbalancedTokens,
                    "stray text before offset " + std::to_string(i));
      inside = true;
      body_begin = i + cfg.start_token.size();
    } else {
      ++end_count;
      if (!inside)
        throw Error(ErrorCode::UnbalancedTokens,
                    "end token without a start at offset " + std::to_string(i));
      bodies.push_back({body_begin, i});
      inside = false;
      outside_from = i + cfg.end_token.size();
    }
    i += hit->size();
  }
  if (inside || start_count != end_count)
    throw Error(ErrorCode::UnbalancedTokens,
                std::to_string(start_count) + " start vs " +
                    std::to_string(end_count) + " end tokens");
  if (!all_whitespace(raw, outside_from, raw.size()))
    throw Error(ErrorCode::UnbalancedTokens,
                "stray text after offset " + std::to_string(outside_from));
  if (bodies.size() != n_sentences)
    throw Error(ErrorCode::GroupCountMismatch,
                std::to_string(bodies.size()) + " groups for " +
                    std::to_string(n_sentences) + " sentences");

  PropositionSet set;
  set.mode = GroupingMode::Grouped;
  set.groups.resize(bodies.size());
  for (std::size_t g = 0; g < bodies.size(); ++g) {
    const std::string body =
        raw.substr(bodies[g].begin, bodies[g].end - bodies[g].begin);
    const auto props = parse_bullets(body, cfg, /*strict=*/true, g);
    if (props.empty())
      throw Error(ErrorCode::EmptyGroup,
                  "group " + std::to_string(g) + " has no bullet lines");
    for (const auto& text : props) set.groups[g].push_back({text, g});
  }
  return set;
}

PropositionSet parse_ungrouped_output(const std::string& raw,
                                      const FormatConfig& cfg) {
  check_config(cfg);
  const auto props = parse_bullets(raw, cfg, /*strict=*/false, 0);
  if (props.empty())
    throw Error(ErrorCode::NoPropositionsFound, "no bullet lines in output");
  return PropositionSet::ungrouped(props);
}

}  // namespace aps
