#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hallu {

/// Text template with `{name}` placeholders and optional blocks
/// `{?name}...{/name}` that are dropped when `name` has no value. Rendering is
/// a single pass, so substituted values are never re-expanded. Braces not
/// forming a placeholder are literal. Lines starting with "#!" are comments.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  PromptTemplate(std::string name, std::string_view text);

  using Values = std::map<std::string, std::optional<std::string>>;

  /// Throws ConfigError if a placeholder used by the template has no entry in
  /// `values`, or a plain placeholder maps to nullopt.
  std::string render(const Values& values) const;

  /// Throws ConfigError unless the template's placeholders are exactly
  /// `required` plus any of `optional_names`.
  void require(const std::set<std::string>& required,
               const std::set<std::string>& optional_names = {}) const;

  const std::set<std::string>& placeholders() const { return placeholders_; }
  const std::string& name() const { return name_; }

 private:
  struct Piece {
    enum Kind { text, var, block_open, block_close } kind;
    std::string value;
  };

  std::string name_;
  std::vector<Piece> pieces_;
  std::set<std::string> placeholders_;
};

/// The four prompt templates plus per-language worked examples.
///
/// Directory layout: main.txt, roles.txt, keyword.txt, summarize.txt,
/// example_<lang>.txt (lowercase code; example_en.txt is required and used
/// when a language has no example of its own).
struct PromptSet {
  PromptTemplate main;
  PromptTemplate roles;
  PromptTemplate keyword;
  PromptTemplate summarize;
  std::map<std::string, std::string> examples;

  /// Loads and validates every template. Throws ConfigError.
  static PromptSet load(const std::filesystem::path& dir);

  const std::string& example_for(const std::string& lang) const;
};

/// Directory the build configured as the default prompt location.
std::filesystem::path default_prompt_dir();

/// Substituted for {knowledge} when no external knowledge is available.
inline constexpr const char* kNoKnowledgeSentinel = "No external knowledge available.";

/// English name of a language code ("HI" -> "Hindi"); unknown codes come
/// back unchanged.
std::string language_name(const std::string& code);

/// Wikipedia subdomain for a language code ("EN" -> "en").
std::string wiki_code(const std::string& code);

}  // namespace hallu
