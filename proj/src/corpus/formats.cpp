#include "xlt/corpus/formats.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "xlt/corpus/bio.hpp"
#include "xlt/error.hpp"
#include "xlt/util/text.hpp"

namespace xlt {

using nlohmann::json;

// CoNLL -------------------------------------------------------------------

namespace {

void flush_sentence(Dataset& out, std::vector<std::string>& tokens,
                    std::vector<std::string>& tags, const ParseOptions& options) {
  if (tokens.empty()) return;
  if (tokens.front() != "-DOCSTART-") {
    TokenInstance inst;
    inst.id = std::to_string(out.tokens.size());
    inst.tags = bio::repair(tags);
    for (const auto& span : bio::spans(inst.tags)) remember_label(out.label_set, span.type);
    inst.tokens = std::move(tokens);
    inst.language = options.language;
    out.tokens.push_back(std::move(inst));
  }
  tokens.clear();
  tags.clear();
}

}  // namespace

Dataset parse_conll(std::string_view text, std::size_t column,
                    const ParseOptions& options) {
  if (text::is_blank(text)) fail(ErrorCode::EmptyInput, "no CoNLL sentences");
  Dataset out;
  out.task = TaskKind::NER;
  out.split = options.split;

  std::vector<std::string> tokens;
  std::vector<std::string> tags;
  const auto lines = text::lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::is_blank(lines[n])) {
      flush_sentence(out, tokens, tags, options);
      continue;
    }
    auto columns = text::split_whitespace(lines[n]);
    if (columns.size() <= column) {
      fail(ErrorCode::RaggedLine,
           "line " + std::to_string(n + 1) + " has " + std::to_string(columns.size()) +
               " columns, tag column is " + std::to_string(column),
           n + 1);
    }
    if (columns.front() != "-DOCSTART-" && !bio::parse_tag(columns[column])) {
      fail(ErrorCode::InvalidTag,
           "line " + std::to_string(n + 1) + ": '" + columns[column] + "'", n + 1);
    }
    tokens.push_back(std::move(columns.front()));
    tags.push_back(std::move(columns[column]));
  }
  flush_sentence(out, tokens, tags, options);
  if (out.tokens.empty()) fail(ErrorCode::EmptyInput, "no CoNLL sentences");
  return out;
}

std::string write_conll(const Dataset& dataset) {
  if (dataset.task != TaskKind::NER) fail(ErrorCode::TaskMismatch, "CoNLL holds NER data only");
  std::string out;
  for (const auto& inst : dataset.tokens) {
    for (std::size_t i = 0; i < inst.tokens.size(); ++i) {
      const auto& token = inst.tokens[i];
      if (token.empty() || token.find_first_of(" \t\r\n") != std::string::npos) {
        fail(ErrorCode::ContractViolation, "token '" + token + "' cannot be written as a CoNLL column");
      }
      out += token;
      out += ' ';
      out += inst.tags[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

// TSV ---------------------------------------------------------------------

namespace {

std::size_t resolve_column(const std::string& ref, bool header,
                           const std::unordered_map<std::string, std::size_t>& names) {
  if (header) {
    auto it = names.find(ref);
    if (it == names.end()) fail(ErrorCode::MissingColumn, "no column named '" + ref + "'");
    return it->second;
  }
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), index);
  if (ec != std::errc{} || ptr != ref.data() + ref.size()) {
    fail(ErrorCode::MissingColumn, "header-less schema needs numeric columns, got '" + ref + "'");
  }
  return index;
}

}  // namespace

Dataset parse_sequence_tsv(std::string_view text, const TsvSchema& schema,
                           TaskKind task, const ParseOptions& options) {
  if (!is_sequence_task(task)) fail(ErrorCode::TaskMismatch, "TSV holds sequence tasks only");
  if ((task == TaskKind::NLI) != schema.text_b.has_value()) {
    fail(ErrorCode::MissingColumn, "NLI needs a text_b column, TC must not have one");
  }
  Dataset out;
  out.task = task;
  out.split = options.split;
  std::unordered_set<std::string> closed;
  if (schema.closed_labels) {
    out.label_set = *schema.closed_labels;
    closed.insert(out.label_set.begin(), out.label_set.end());
  }

  auto lines = text::lines(text);
  std::size_t first = 0;
  std::unordered_map<std::string, std::size_t> names;
  if (schema.header) {
    while (first < lines.size() && text::is_blank(lines[first])) ++first;
    if (first == lines.size()) return out;
    auto header = text::split(lines[first], '\t');
    for (std::size_t i = 0; i < header.size(); ++i) names.emplace(std::string(header[i]), i);
    ++first;
  }
  const std::size_t text_a = resolve_column(schema.text_a, schema.header, names);
  const std::size_t label = resolve_column(schema.label, schema.header, names);
  std::optional<std::size_t> text_b;
  if (schema.text_b) text_b = resolve_column(*schema.text_b, schema.header, names);
  std::optional<std::size_t> id;
  if (schema.id) id = resolve_column(*schema.id, schema.header, names);
  const std::size_t needed = std::max({text_a, label, text_b.value_or(0), id.value_or(0)}) + 1;

  for (std::size_t n = first; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    auto cells = text::split(lines[n], '\t');
    if (cells.size() < needed) {
      fail(ErrorCode::MissingColumn,
           "line " + std::to_string(n + 1) + " has " + std::to_string(cells.size()) +
               " columns, need " + std::to_string(needed),
           n + 1);
    }
    SequenceInstance inst;
    inst.id = id ? std::string(cells[*id]) : std::to_string(out.sequences.size());
    inst.text_a = std::string(cells[text_a]);
    if (text_b) inst.text_b = std::string(cells[*text_b]);
    inst.label = std::string(cells[label]);
    inst.language = options.language;
    if (schema.closed_labels) {
      if (!closed.contains(inst.label)) {
        fail(ErrorCode::LabelOutsideSet,
             "line " + std::to_string(n + 1) + ": label '" + inst.label + "'", n + 1);
      }
    } else {
      remember_label(out.label_set, inst.label);
    }
    out.sequences.push_back(std::move(inst));
  }
  return out;
}

TsvSchema default_schema(TaskKind task) {
  TsvSchema schema;
  schema.id = "id";
  if (task == TaskKind::NLI) schema.text_b = "text_b";
  return schema;
}

std::string write_sequence_tsv(const Dataset& dataset) {
  if (!is_sequence_task(dataset.task)) fail(ErrorCode::TaskMismatch, "TSV holds sequence tasks only");
  auto check = [](const std::string& field) -> const std::string& {
    if (field.find_first_of("\t\n\r") != std::string::npos) {
      fail(ErrorCode::ContractViolation, "field contains a tab or newline");
    }
    return field;
  };
  const bool nli = dataset.task == TaskKind::NLI;
  std::string out = nli ? "id\ttext_a\ttext_b\tlabel\n" : "id\ttext_a\tlabel\n";
  for (const auto& inst : dataset.sequences) {
    out += check(inst.id) + '\t' + check(inst.text_a) + '\t';
    if (nli) out += check(inst.text_b.value_or("")) + '\t';
    out += check(inst.label) + '\n';
  }
  return out;
}

// JSONL -------------------------------------------------------------------

namespace {

void provenance_fields(json& obj, const LanguageTag& language, const Provenance& provenance) {
  obj["language"] = language.code();
  obj["script"] = language.script() ? json(*language.script()) : json(nullptr);
  obj["provenance"] = std::string(to_string(provenance.origin));
  obj["pivot"] = provenance.pivot ? json(provenance.pivot->str()) : json(nullptr);
}

LanguageTag read_language(const json& obj) {
  const auto& script = obj.at("script");
  if (script.is_null()) return LanguageTag(obj.at("language").get<std::string>());
  return LanguageTag(obj.at("language").get<std::string>(), script.get<std::string>());
}

Provenance read_provenance(const json& obj) {
  Provenance p;
  p.origin = parse_origin(obj.at("provenance").get<std::string>());
  const auto& pivot = obj.at("pivot");
  if (!pivot.is_null()) p.pivot = LanguageTag::parse(pivot.get<std::string>());
  return p;
}

}  // namespace

std::string write_jsonl(const Dataset& dataset) {
  std::string out;
  const std::string task(to_string(dataset.task));
  if (is_sequence_task(dataset.task)) {
    for (const auto& inst : dataset.sequences) {
      json obj;
      obj["id"] = inst.id;
      obj["task"] = task;
      provenance_fields(obj, inst.language, inst.provenance);
      obj["text_a"] = inst.text_a;
      obj["text_b"] = inst.text_b ? json(*inst.text_b) : json(nullptr);
      obj["label"] = inst.label;
      out += obj.dump();
      out += '\n';
    }
  } else {
    for (const auto& inst : dataset.tokens) {
      json obj;
      obj["id"] = inst.id;
      obj["task"] = task;
      provenance_fields(obj, inst.language, inst.provenance);
      obj["tokens"] = inst.tokens;
      obj["tags"] = inst.tags;
      out += obj.dump();
      out += '\n';
    }
  }
  return out;
}

Dataset read_jsonl(std::string_view text, const JsonlReadOptions& options) {
  Dataset out;
  out.split = options.split;
  if (options.task) out.task = *options.task;
  if (options.label_set) out.label_set = *options.label_set;
  bool typed = options.task.has_value();

  const auto lines = text::lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::is_blank(lines[n])) continue;
    const std::size_t line_no = n + 1;
    try {
      const json obj = json::parse(lines[n]);
      const TaskKind task = parse_task_kind(obj.at("task").get<std::string>());
      if (!typed) {
        out.task = task;
        typed = true;
      } else if (task != out.task) {
        fail(ErrorCode::TaskMismatch, "line " + std::to_string(line_no) + " has task " +
                                          std::string(to_string(task)), line_no);
      }
      if (is_sequence_task(task)) {
        SequenceInstance inst;
        inst.id = obj.at("id").get<std::string>();
        inst.language = read_language(obj);
        inst.provenance = read_provenance(obj);
        inst.text_a = obj.at("text_a").get<std::string>();
        if (!obj.at("text_b").is_null()) inst.text_b = obj.at("text_b").get<std::string>();
        inst.label = obj.at("label").get<std::string>();
        if (!options.label_set) remember_label(out.label_set, inst.label);
        out.sequences.push_back(std::move(inst));
      } else {
        TokenInstance inst;
        inst.id = obj.at("id").get<std::string>();
        inst.language = read_language(obj);
        inst.provenance = read_provenance(obj);
        inst.tokens = obj.at("tokens").get<std::vector<std::string>>();
        inst.tags = obj.at("tags").get<std::vector<std::string>>();
        if (!options.label_set) {
          for (const auto& span : bio::spans(inst.tags)) remember_label(out.label_set, span.type);
        }
        out.tokens.push_back(std::move(inst));
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + e.what(), line_no);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TaskMismatch) throw;
      fail(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + e.detail(), line_no);
    }
  }
  if (!typed) fail(ErrorCode::EmptyInput, "cannot infer the task of an empty file");
  out.validate();
  return out;
}

}  // namespace xlt
