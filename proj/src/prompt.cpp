#include "hallu/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "hallu/error.hpp"

#ifndef HALLU_PROMPT_DIR
#define HALLU_PROMPT_DIR "prompts"
#endif

namespace hallu {

namespace {

bool ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string strip_comments(std::string_view text) {
  std::string out;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.rfind("#!", 0) == 0) continue;
    if (!first) out.push_back('\n');
    out += line;
    first = false;
  }
  // Trailing blank lines of the file are not part of the prompt.
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("missing prompt template " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string_view raw) : name_(std::move(name)) {
  const std::string text = strip_comments(raw);
  std::string literal;
  std::vector<std::string> open_blocks;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      Piece::Kind kind = Piece::var;
      if (j < text.size() && (text[j] == '?' || text[j] == '/')) {
        kind = text[j] == '?' ? Piece::block_open : Piece::block_close;
        ++j;
      }
      const std::size_t id_start = j;
      while (j < text.size() && ident_char(text[j])) ++j;
      if (j > id_start && j < text.size() && text[j] == '}') {
        std::string id = text.substr(id_start, j - id_start);
        if (!literal.empty()) pieces_.push_back({Piece::text, std::move(literal)});
        literal.clear();
        if (kind == Piece::block_open) {
          open_blocks.push_back(id);
        } else if (kind == Piece::block_close) {
          if (open_blocks.empty() || open_blocks.back() != id) {
            throw ConfigError(name_ + ": unmatched {/" + id + "}");
          }
          open_blocks.pop_back();
        }
        placeholders_.insert(id);
        pieces_.push_back({kind, std::move(id)});
        i = j + 1;
        continue;
      }
    }
    literal.push_back(text[i]);
    ++i;
  }
  if (!open_blocks.empty()) throw ConfigError(name_ + ": unterminated {?" + open_blocks.back() + "}");
  if (!literal.empty()) pieces_.push_back({Piece::text, std::move(literal)});
}

std::string PromptTemplate::render(const Values& values) const {
  std::string out;
  int skipping = 0;  // depth of dropped blocks
  for (const auto& piece : pieces_) {
    if (piece.kind == Piece::text) {
      if (!skipping) out += piece.value;
      continue;
    }
    auto it = values.find(piece.value);
    if (it == values.end()) throw ConfigError(name_ + ": no value for {" + piece.value + "}");
    const bool present = it->second.has_value();
    switch (piece.kind) {
      case Piece::block_open:
        if (skipping || !present) ++skipping;
        break;
      case Piece::block_close:
        if (skipping) --skipping;
        break;
      case Piece::var:
        if (skipping) break;
        if (!present) throw ConfigError(name_ + ": {" + piece.value + "} used outside its optional block");
        out += *it->second;
        break;
      case Piece::text:
        break;
    }
  }
  return out;
}

void PromptTemplate::require(const std::set<std::string>& required,
                             const std::set<std::string>& optional_names) const {
  for (const auto& r : required) {
    if (!placeholders_.count(r)) throw ConfigError(name_ + ": missing placeholder {" + r + "}");
  }
  for (const auto& p : placeholders_) {
    if (!required.count(p) && !optional_names.count(p)) {
      throw ConfigError(name_ + ": unknown placeholder {" + p + "}");
    }
  }
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("prompt directory not found: " + dir.string());
  }
  PromptSet set;
  set.main = PromptTemplate("main.txt", read_file(dir / "main.txt"));
  set.main.require({"lang", "question", "answer", "knowledge", "example"}, {"role"});
  set.roles = PromptTemplate("roles.txt", read_file(dir / "roles.txt"));
  set.roles.require({"lang", "question", "answer"});
  set.keyword = PromptTemplate("keyword.txt", read_file(dir / "keyword.txt"));
  set.keyword.require({"question"});
  set.summarize = PromptTemplate("summarize.txt", read_file(dir / "summarize.txt"));
  set.summarize.require({"lang", "question", "answer", "knowledge"});

  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto file = entry.path().filename().string();
    if (file.rfind("example_", 0) == 0 && entry.path().extension() == ".txt") {
      const auto lang = lower(file.substr(8, file.size() - 8 - 4));
      set.examples[lang] = strip_comments(read_file(entry.path()));
    }
  }
  if (!set.examples.count("en")) throw ConfigError("missing prompt template " + (dir / "example_en.txt").string());
  return set;
}

const std::string& PromptSet::example_for(const std::string& lang) const {
  if (auto it = examples.find(lower(lang)); it != examples.end()) return it->second;
  return examples.at("en");
}

std::filesystem::path default_prompt_dir() { return HALLU_PROMPT_DIR; }

std::string language_name(const std::string& code) {
  static const std::map<std::string, std::string> names = {
      {"ar", "Arabic"},  {"eu", "Basque"},  {"ca", "Catalan"}, {"zh", "Chinese"},
      {"cs", "Czech"},   {"en", "English"}, {"fa", "Farsi"},   {"fi", "Finnish"},
      {"fr", "French"},  {"de", "German"},  {"hi", "Hindi"},   {"it", "Italian"},
      {"es", "Spanish"}, {"sv", "Swedish"}, {"ru", "Russian"}, {"ja", "Japanese"},
      {"pt", "Portuguese"}, {"nl", "Dutch"}, {"pl", "Polish"}, {"tr", "Turkish"},
  };
  auto key = lower(code);
  if (auto dash = key.find_first_of("-_"); dash != std::string::npos) key.resize(dash);
  auto it = names.find(key);
  return it == names.end() ? code : it->second;
}

std::string wiki_code(const std::string& code) {
  auto key = lower(code);
  if (auto dash = key.find_first_of("-_"); dash != std::string::npos) key.resize(dash);
  return key;
}

}  // namespace hallu
