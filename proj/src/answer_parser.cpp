#include "argen/answer_parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>

namespace argen {

namespace {

bool word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || u >= 0x80;
}

char lower_char(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower_char);
  return out;
}

// Lowercase with every whitespace run collapsed to one space.
std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(lower_char(c));
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  return lines;
}

std::optional<std::size_t> key_lookup(const AnswerKey& key, char label) {
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(label)));
  for (const auto& option : key) {
    if (option.label == up) return option.index;
  }
  return std::nullopt;
}

// Rule 1: "final answer" [is] [:|-] [(|[] <letter> [)|]] followed by a non-word char.
std::optional<std::size_t> match_delimiter(std::string_view response, const AnswerKey& key) {
  const std::string text = lower(response);
  std::optional<std::size_t> found;
  static const std::regex kPrefix(R"(final\s*answer)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kPrefix); it != std::sregex_iterator(); ++it) {
    std::size_t p = static_cast<std::size_t>(it->position() + it->length());
    auto skip = [&](std::string_view chars) {
      while (p < text.size() && chars.find(text[p]) != std::string_view::npos) ++p;
    };
    skip(" \t*_");
    if (text.compare(p, 2, "is") == 0 && (p + 2 >= text.size() || !word_char(text[p + 2]))) {
      p += 2;
      skip(" \t*_");
    }
    if (p < text.size() && (text[p] == ':' || text[p] == '-')) ++p;
    skip(" \t*_");
    if (p < text.size() && (text[p] == '(' || text[p] == '[')) ++p;
    if (p >= text.size() || !std::isalpha(static_cast<unsigned char>(text[p]))) continue;
    const char letter = text[p++];
    if (p < text.size() && (text[p] == ')' || text[p] == ']')) ++p;
    if (p < text.size() && word_char(text[p])) continue;
    if (auto idx = key_lookup(key, letter)) found = idx;
  }
  return found;
}

// Rule 2: a label standing on its own in the last non-empty line.
std::optional<std::size_t> match_final_line(std::string_view response, const AnswerKey& key) {
  auto lines = split_lines(response);
  std::string last;
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    last = trim(*it);
    if (!last.empty()) break;
  }
  if (last.empty()) return std::nullopt;

  std::vector<std::string> tokens;
  {
    std::size_t pos = 0;
    while (pos < last.size()) {
      while (pos < last.size() && std::isspace(static_cast<unsigned char>(last[pos]))) ++pos;
      auto end = pos;
      while (end < last.size() && !std::isspace(static_cast<unsigned char>(last[end]))) ++end;
      if (end > pos) tokens.push_back(last.substr(pos, end - pos));
      pos = end;
    }
  }

  constexpr std::string_view kLead = "([{\"'*_";
  constexpr std::string_view kTrail = ")]}\"'*_.,:;!?";
  constexpr std::string_view kBrackets = "()[]{}*_";
  std::optional<std::size_t> found;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    std::string_view tok = tokens[t];
    bool wrapped = false;
    bool punctuated = false;
    while (!tok.empty() && kLead.find(tok.front()) != std::string_view::npos) {
      wrapped |= kBrackets.find(tok.front()) != std::string_view::npos;
      tok.remove_prefix(1);
    }
    while (!tok.empty() && kTrail.find(tok.back()) != std::string_view::npos) {
      if (kBrackets.find(tok.back()) != std::string_view::npos) {
        wrapped = true;
      } else {
        punctuated = true;
      }
      tok.remove_suffix(1);
    }
    if (tok.size() != 1 || !std::isalpha(static_cast<unsigned char>(tok[0]))) continue;
    const bool upper = std::isupper(static_cast<unsigned char>(tok[0])) != 0;
    const bool last_token = t + 1 == tokens.size();
    const bool sole_token = tokens.size() == 1;
    const bool qualifies = wrapped || sole_token || (upper && (punctuated || last_token));
    if (!qualifies) continue;
    if (auto idx = key_lookup(key, tok[0])) found = idx;
  }
  return found;
}

// Rule 3: longest candidate text occurring with word boundaries; ties go to
// the candidate whose last occurrence is later, then to the lower index.
std::optional<std::size_t> match_candidate_text(std::string_view response, const AnswerKey& key) {
  const std::string text = normalize(response);
  std::optional<std::size_t> best;
  std::size_t best_len = 0;
  std::size_t best_pos = 0;
  for (const auto& option : key) {
    const std::string needle = normalize(option.text);
    if (needle.empty()) continue;
    const bool guard_front = word_char(needle.front());
    const bool guard_back = word_char(needle.back());
    std::optional<std::size_t> last_hit;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
      const auto end = pos + needle.size();
      if (guard_front && pos > 0 && word_char(text[pos - 1])) continue;
      if (guard_back && end < text.size() && word_char(text[end])) continue;
      last_hit = pos;
    }
    if (!last_hit) continue;
    const bool better = !best || needle.size() > best_len ||
                        (needle.size() == best_len && *last_hit > best_pos) ||
                        (needle.size() == best_len && *last_hit == best_pos && option.index < *best);
    if (better) {
      best = option.index;
      best_len = needle.size();
      best_pos = *last_hit;
    }
  }
  return best;
}

std::string strip_bullet(std::string_view line) {
  std::string s = trim(line);
  static const std::regex kBullet(R"(^(?:[-*+]|\d+[.)]|\(\d+\))\s+)");
  if (s.rfind("\xE2\x80\xA2", 0) == 0) {
    s = trim(std::string_view(s).substr(3));
  } else {
    s = std::regex_replace(s, kBullet, "", std::regex_constants::format_first_only);
  }
  return trim(s);
}

struct Block {
  std::size_t index;
  std::vector<std::string> lines;
};

// Splits a response into "Choice X:" blocks keyed by candidate index. The
// first block for a label wins.
std::vector<Block> segment_blocks(std::string_view response, const AnswerKey& key) {
  static const std::regex kHeader(
      R"(^[\s#>*_\-]*(?:choice|option|candidate|answer)\s*[\(\[]?([a-z])[\)\]]?\s*(?:[:.)\-]|\*\*|$).*)",
      std::regex::icase);
  std::vector<Block> blocks;
  std::vector<bool> seen(key.size() + kMaxCandidates, false);
  Block* current = nullptr;
  for (const auto& line : split_lines(response)) {
    std::smatch m;
    if (std::regex_match(line, m, kHeader)) {
      auto idx = key_lookup(key, m[1].str()[0]);
      if (idx && !seen[*idx]) {
        seen[*idx] = true;
        blocks.push_back(Block{*idx, {}});
        current = &blocks.back();
      } else {
        current = nullptr;
      }
      continue;
    }
    if (current != nullptr) current->lines.push_back(line);
  }
  return blocks;
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::kMalformedArguments, what); }

}  // namespace

ParsedAnswer parse_final_answer(std::string_view response, const AnswerKey& key) {
  if (key.empty()) throw Error(ErrorCode::kPrecondition, "answer key is empty");
  if (auto idx = match_delimiter(response, key)) return {*idx, ParseStatus::kOk};
  if (auto idx = match_final_line(response, key)) return {*idx, ParseStatus::kOk};
  if (auto idx = match_candidate_text(response, key)) return {*idx, ParseStatus::kFuzzyMatched};
  throw Error(ErrorCode::kParseFailure, "no final answer found in response");
}

ParsedRanking parse_ranking(std::string_view response, const AnswerKey& key) {
  if (key.empty()) throw Error(ErrorCode::kPrecondition, "answer key is empty");
  const auto lines = split_lines(response);
  static const std::regex kRankingLine(R"(^[\s#>*_\-]*(?:final\s+)?ranking[\s*_]*:[\s*_]*(.*)$)", std::regex::icase);

  std::optional<std::string> body;
  for (std::size_t i = lines.size(); i-- > 0;) {
    std::smatch m;
    if (!std::regex_match(lines[i], m, kRankingLine)) continue;
    std::string rest = trim(m[1].str());
    // "Ranking:" alone on a line with the order on the next non-empty line.
    for (std::size_t j = i + 1; rest.empty() && j < lines.size(); ++j) rest = trim(lines[j]);
    body = rest;
    break;
  }

  ParsedRanking out;
  const std::size_t n = key.size();
  std::vector<bool> placed(n, false);

  if (body) {
    struct Token {
      char label;
      bool tied_with_previous;
    };
    auto collect = [&](bool accept_lower) {
      std::vector<Token> tokens;
      bool saw_equals = false;
      const std::string& s = *body;
      for (std::size_t p = 0; p < s.size(); ++p) {
        const char c = s[p];
        if (c == '=') saw_equals = true;
        if (!std::isalpha(static_cast<unsigned char>(c))) continue;
        const bool standalone = (p == 0 || !word_char(s[p - 1])) && (p + 1 == s.size() || !word_char(s[p + 1]));
        if (!standalone) continue;
        if (!accept_lower && !std::isupper(static_cast<unsigned char>(c))) continue;
        tokens.push_back(Token{c, !tokens.empty() && saw_equals});
        saw_equals = false;
      }
      return tokens;
    };
    auto tokens = collect(false);
    if (tokens.empty()) tokens = collect(true);

    for (const auto& tok : tokens) {
      auto idx = key_lookup(key, tok.label);
      if (!idx) {
        out.notes.push_back(std::string("ranking names unknown label ") + tok.label);
        continue;
      }
      if (placed[*idx]) continue;
      if (tok.tied_with_previous && !out.ranking.order.empty()) {
        out.notes.push_back("tie involving " + std::string(1, key[*idx].label) + " resolved by listing order");
        out.status = ParseStatus::kFuzzyMatched;
      }
      placed[*idx] = true;
      out.ranking.order.push_back(*idx);
    }
  }

  if (out.ranking.order.empty()) {
    // No usable ranking line; fall back to a stated final answer.
    ParsedAnswer answer = parse_final_answer(response, key);
    out.notes.push_back("no ranking line; top choice taken from the final answer");
    out.ranking.order.push_back(answer.index);
    placed[answer.index] = true;
    out.status = ParseStatus::kFuzzyMatched;
  }

  if (out.ranking.order.size() < n) {
    std::string missing;
    for (std::size_t i = 0; i < n; ++i) {
      if (placed[i]) continue;
      if (!missing.empty()) missing.append(", ");
      missing.push_back(key[i].label);
      out.ranking.order.push_back(i);
    }
    out.notes.push_back(std::string(to_string(ErrorCode::kMalformedArguments)) + ": ranking omitted " + missing +
                        "; appended in original order");
    out.status = ParseStatus::kFuzzyMatched;
  }
  return out;
}

std::vector<ArgumentTuple> parse_argument_tuples(std::string_view response, const AnswerKey& key) {
  static const std::regex kField(
      R"(^[\s\-*#>_]*(?:argument\s+)?(supporting|support|for|pro|attacking|attack|against|con)(?:\s+argument)?[\s*_]*:[\s*_]*(.*)$)",
      std::regex::icase);
  auto blocks = segment_blocks(response, key);
  std::vector<std::optional<ArgumentTuple>> by_index(key.size());
  for (const auto& block : blocks) {
    ArgumentTuple tuple;
    tuple.candidate_index = block.index;
    std::string* field = nullptr;
    for (const auto& line : block.lines) {
      std::smatch m;
      if (std::regex_match(line, m, kField)) {
        const std::string name = lower(m[1].str());
        const bool support = name == "supporting" || name == "support" || name == "for" || name == "pro";
        field = support ? &tuple.supporting : &tuple.attacking;
        if (field->empty()) {
          *field = trim(m[2].str());
        } else {
          field = nullptr;  // repeated field; keep the first
        }
        continue;
      }
      const std::string text = trim(line);
      if (field != nullptr && !text.empty()) {
        if (!field->empty()) field->push_back(' ');
        field->append(text);
      }
    }
    by_index[block.index] = std::move(tuple);
  }

  std::vector<ArgumentTuple> out;
  for (const auto& option : key) {
    const auto& tuple = by_index[option.index];
    if (!tuple) malformed(std::string("no arguments for choice ") + option.label);
    if (tuple->supporting.empty()) malformed(std::string("choice ") + option.label + " has no supporting argument");
    if (tuple->attacking.empty()) malformed(std::string("choice ") + option.label + " has no attacking argument");
    out.push_back(*tuple);
  }
  return out;
}

std::vector<AssumptionSet> parse_assumption_sets(std::string_view response, const AnswerKey& key) {
  static const std::regex kField(R"(^[\s\-*#>_]*(?:implicit\s+)?assumptions?[\s*_]*:[\s*_]*(.*)$)",
                                 std::regex::icase);
  auto blocks = segment_blocks(response, key);
  std::vector<std::optional<AssumptionSet>> by_index(key.size());
  for (const auto& block : blocks) {
    AssumptionSet set;
    set.candidate_index = block.index;
    for (const auto& line : block.lines) {
      std::smatch m;
      std::string text;
      if (std::regex_match(line, m, kField)) {
        text = trim(m[1].str());
        // Inline lists separated by semicolons.
        std::size_t pos = 0;
        while (!text.empty() && pos <= text.size()) {
          auto semi = text.find(';', pos);
          if (semi == std::string::npos) semi = text.size();
          auto piece = strip_bullet(std::string_view(text).substr(pos, semi - pos));
          if (!piece.empty()) set.propositions.push_back(piece);
          pos = semi + 1;
        }
        continue;
      }
      text = strip_bullet(line);
      if (!text.empty()) set.propositions.push_back(text);
    }
    by_index[block.index] = std::move(set);
  }

  std::vector<AssumptionSet> out;
  for (const auto& option : key) {
    const auto& set = by_index[option.index];
    if (!set) malformed(std::string("no assumptions for choice ") + option.label);
    if (set->propositions.empty()) malformed(std::string("choice ") + option.label + " lists no assumptions");
    out.push_back(*set);
  }
  return out;
}

std::vector<std::string> parse_candidate_list(std::string_view response) {
  std::vector<std::string> out;
  for (const auto& line : split_lines(response)) {
    std::string text = strip_bullet(line);
    while (!text.empty() && (text.front() == '"' || text.front() == '*')) text.erase(text.begin());
    while (!text.empty() && (text.back() == '"' || text.back() == '*')) text.pop_back();
    text = trim(text);
    if (text.empty() || text.back() == ':') continue;
    out.push_back(std::move(text));
  }
  return out;
}

}  // namespace argen
