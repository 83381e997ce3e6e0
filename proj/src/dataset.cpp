#include "hallu/dataset.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hallu/error.hpp"
#include "hallu/utf8.hpp"

namespace hallu {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

// Calls fn(json, line_no) for every non-blank line.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    fn(obj, line_no);
  }
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(line_no, std::string("missing key '") + key + "'");
  if (!it->is_string()) throw SchemaError(line_no, std::string("key '") + key + "' must be a string");
  return it->get<std::string>();
}

std::size_t as_offset(const json& v, std::size_t line_no) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw SchemaError(line_no, "offsets must be non-negative integers");
  }
  return v.get<std::size_t>();
}

SpanList parse_hard(const json& arr, std::size_t line_no) {
  if (!arr.is_array()) throw SchemaError(line_no, "'hard_labels' must be an array");
  SpanList out;
  for (const auto& pair : arr) {
    if (!pair.is_array() || pair.size() != 2) {
      throw SchemaError(line_no, "hard label must be [start, end]");
    }
    SpanLabel s{as_offset(pair[0], line_no), as_offset(pair[1], line_no), std::nullopt};
    if (s.start >= s.end) throw SchemaError(line_no, "hard label with start >= end");
    out.push_back(s);
  }
  return out;
}

SpanList parse_soft(const json& arr, std::size_t line_no) {
  if (!arr.is_array()) throw SchemaError(line_no, "'soft_labels' must be an array");
  SpanList out;
  for (const auto& obj : arr) {
    if (!obj.is_object() || !obj.contains("start") || !obj.contains("end") ||
        !obj.contains("prob")) {
      throw SchemaError(line_no, "soft label must have start, end, prob");
    }
    SpanLabel s{as_offset(obj["start"], line_no), as_offset(obj["end"], line_no),
                std::nullopt};
    if (!obj["prob"].is_number()) throw SchemaError(line_no, "soft label prob must be a number");
    const double p = obj["prob"].get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw SchemaError(line_no, "soft label prob outside [0,1]");
    s.prob = p;
    if (s.start >= s.end) throw SchemaError(line_no, "soft label with start >= end");
    out.push_back(s);
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<QAItem> parse_items(std::istream& in) {
  std::vector<QAItem> items;
  for_each_line(in, [&](const json& obj, std::size_t line_no) {
    QAItem item;
    item.id = require_string(obj, "id", line_no);
    item.lang = require_string(obj, "lang", line_no);
    item.question = require_string(obj, "model_input", line_no);
    item.answer = require_string(obj, "model_output_text", line_no);
    items.push_back(std::move(item));
  });
  return items;
}

std::vector<QAItem> read_items(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_items(in);
}

std::string prediction_to_json(const PredictionRecord& record) {
  ordered_json obj;
  obj["id"] = record.id;
  obj["lang"] = record.lang;
  if (record.answer) obj["model_output_text"] = *record.answer;
  auto hard = ordered_json::array();
  for (const auto& s : record.hard_labels) hard.push_back({s.start, s.end});
  obj["hard_labels"] = std::move(hard);
  auto soft = ordered_json::array();
  for (const auto& s : record.soft_labels) {
    ordered_json label;
    label["start"] = s.start;
    label["end"] = s.end;
    label["prob"] = s.prob.value_or(1.0);
    soft.push_back(std::move(label));
  }
  obj["soft_labels"] = std::move(soft);
  obj["runs_used"] = record.runs_used;
  return obj.dump(-1, ' ', false, ordered_json::error_handler_t::strict);
}

PredictionRecord prediction_from_json(const std::string& line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
  PredictionRecord r;
  r.id = require_string(obj, "id", line_no);
  r.lang = require_string(obj, "lang", line_no);
  if (obj.contains("model_output_text")) {
    r.answer = require_string(obj, "model_output_text", line_no);
  }
  if (!obj.contains("hard_labels")) throw SchemaError(line_no, "missing key 'hard_labels'");
  if (!obj.contains("soft_labels")) throw SchemaError(line_no, "missing key 'soft_labels'");
  r.hard_labels = parse_hard(obj["hard_labels"], line_no);
  r.soft_labels = parse_soft(obj["soft_labels"], line_no);
  if (obj.contains("runs_used")) {
    if (!obj["runs_used"].is_number_integer()) {
      throw SchemaError(line_no, "'runs_used' must be an integer");
    }
    r.runs_used = obj["runs_used"].get<int>();
  }
  if (r.answer) {
    const auto len = utf8::length(*r.answer);
    try {
      check_spans(r.hard_labels, len);
      check_spans(r.soft_labels, len);
    } catch (const OffsetError& e) {
      throw SchemaError(line_no, e.what());
    }
  }
  return r;
}

void write_predictions(const std::vector<PredictionRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << prediction_to_json(r) << '\n';
}

void write_predictions(const std::vector<PredictionRecord>& records,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_predictions(records, out);
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<PredictionRecord> parse_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    out.push_back(prediction_from_json(line, line_no));
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_predictions(in);
}

std::vector<GoldRecord> parse_gold(std::istream& in) {
  std::vector<GoldRecord> out;
  for_each_line(in, [&](const json& obj, std::size_t line_no) {
    GoldRecord g;
    g.item.id = require_string(obj, "id", line_no);
    g.item.lang = require_string(obj, "lang", line_no);
    g.item.answer = require_string(obj, "model_output_text", line_no);
    if (obj.contains("model_input")) g.item.question = require_string(obj, "model_input", line_no);
    if (!obj.contains("hard_labels")) throw SchemaError(line_no, "missing key 'hard_labels'");
    g.hard_labels = parse_hard(obj["hard_labels"], line_no);
    if (obj.contains("soft_labels")) {
      g.soft_labels = parse_soft(obj["soft_labels"], line_no);
    } else {
      g.soft_labels = g.hard_labels;
      for (auto& s : g.soft_labels) s.prob = 1.0;
    }
    const auto len = utf8::length(g.item.answer);
    try {
      check_spans(g.hard_labels, len);
      check_spans(g.soft_labels, len);
    } catch (const OffsetError& e) {
      throw SchemaError(line_no, e.what());
    }
    out.push_back(std::move(g));
  });
  return out;
}

std::vector<GoldRecord> read_gold(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_gold(in);
}

}  // namespace hallu
