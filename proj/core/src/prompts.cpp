#include "drift/prompts.hpp"

#include <map>

#include "drift/errors.hpp"

namespace drift {

namespace {

const std::string kExtractiveCtx =
    "Use the provided article delimited by triple quotes to answer question. Provide only the "
    "shortest continuous span from the context without any additional explanation. If the "
    "question is unanswerable, return \"unanswerable\".\n"
    "\"\"\"{passage}\"\"\"\n"
    "Question: {question}";

const std::string kExtractiveParametric =
    "Provide an answer to the given question. If the question is unanswerable, return "
    "\"unanswerable\". Do not provide any explanation.\n"
    "Question: {question}";

const std::string kYesNoCtx =
    "Use the provided article delimited by triple quotes to answer question. Return only TRUE "
    "or FALSE. If the question is unanswerable, return \"unanswerable\". Do not provide any "
    "explanation.\n"
    "\"\"\"{passage}\"\"\"\n"
    "Question: {question}";

const std::string kYesNoParametric =
    "Provide an answer to the given question. Return only TRUE or FALSE. If the question is "
    "unanswerable, return \"unanswerable\". Do not provide any explanation.\n"
    "Question: {question}";

const std::string kFreeformCtx =
    "Use the provided article delimited by triple quotes to answer question. If the question "
    "is unanswerable, return \"unanswerable\". Do not provide any explanation.\n"
    "\"\"\"{passage}\"\"\"\n"
    "Question: {question}";

const std::string kFreeformParametric =
    "Provide an answer to the given question. If the question is unanswerable, return "
    "\"unanswerable\". Do not provide any explanation.\n"
    "Question: {question}";

std::string family_name(TaskKind task) {
  switch (task) {
    case TaskKind::EXTRACTIVE: return "extractive";
    case TaskKind::YESNO: return "boolq";
    case TaskKind::FREEFORM:
    case TaskKind::MULTIHOP: return "freeform";
  }
  return "?";
}

// Substitutes each slot from the template alone; slot-like text inside the
// filled values is never re-scanned.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  size_t pos = 0;
  while (pos < tmpl.size()) {
    size_t open = tmpl.find('{', pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    size_t close = tmpl.find('}', open);
    auto slot = close == std::string::npos
                    ? slots.end()
                    : slots.find(tmpl.substr(open + 1, close - open - 1));
    if (slot == slots.end()) {
      out.append(tmpl, pos, open - pos + 1);
      pos = open + 1;
      continue;
    }
    out.append(tmpl, pos, open - pos);
    out += slot->second;
    pos = close + 1;
  }
  return out;
}

}  // namespace

const std::string kCotSuffix =
    "Think step by step, then state your final answer on the last line after 'Answer:'.";

const std::string& prompt_template(TaskKind task_kind, PromptMode mode) {
  bool ctx = mode != PromptMode::QUESTION_ONLY;
  switch (task_kind) {
    case TaskKind::EXTRACTIVE: return ctx ? kExtractiveCtx : kExtractiveParametric;
    case TaskKind::YESNO: return ctx ? kYesNoCtx : kYesNoParametric;
    case TaskKind::FREEFORM:
    case TaskKind::MULTIHOP: return ctx ? kFreeformCtx : kFreeformParametric;
  }
  raise(ErrorKind::TemplateMissing, "no template for task kind");
}

PromptSpec build_prompt(const QAInstance& instance, const std::optional<std::string>& passage,
                        PromptMode mode) {
  bool needs_passage = mode != PromptMode::QUESTION_ONLY;
  if (needs_passage && (!passage || passage->empty())) {
    raise(ErrorKind::TemplateMissing,
          "mode " + std::string(prompt_mode_name(mode)) + " requires a nonempty passage");
  }
  if (!needs_passage && passage) {
    raise(ErrorKind::TemplateMissing, "QUESTION_ONLY must not carry a passage");
  }
  PromptSpec spec;
  spec.task_kind = instance.task_kind;
  spec.mode = mode;
  spec.template_id =
      family_name(instance.task_kind) + "." +
      (mode == PromptMode::QUESTION_ONLY ? "question_only"
       : mode == PromptMode::WITH_CONTEXT_COT ? "with_context_cot"
                                              : "with_context");
  std::map<std::string, std::string> slots;
  slots["question"] = instance.question;
  if (needs_passage) slots["passage"] = *passage;
  std::string rendered = render_template(prompt_template(instance.task_kind, mode), slots);
  if (mode == PromptMode::WITH_CONTEXT_COT) rendered += "\n" + kCotSuffix;
  spec.rendered = std::move(rendered);
  return spec;
}

std::string assemble_context(const QAInstance& instance,
                             const std::vector<EditedVariant>& edits) {
  std::map<std::string, std::map<std::string, std::string>> replacement;  // title -> orig -> new
  for (const auto& e : edits) {
    bool gold = false;
    for (const auto& t : instance.gold_titles) gold |= (t == e.title);
    if (!gold) {
      raise(ErrorKind::UnknownTitle, "edit names non-gold title '" + e.title + "'");
    }
    replacement[e.title][e.original_paragraph] = e.edited_paragraph;
  }
  std::string context;
  for (const auto& title : instance.titles) {
    if (!context.empty()) context += "\n\n";
    context += title;
    auto paras = instance.original_paragraphs.find(title);
    if (paras == instance.original_paragraphs.end()) continue;
    auto repl = replacement.find(title);
    for (const auto& para : paras->second) {
      context += '\n';
      if (repl != replacement.end()) {
        auto hit = repl->second.find(para);
        if (hit != repl->second.end()) {
          context += hit->second;
          repl->second.erase(hit);
          continue;
        }
      }
      context += para;
    }
  }
  for (const auto& [title, pending] : replacement) {
    if (!pending.empty()) {
      raise(ErrorKind::UnknownTitle,
            "original paragraph not found under title '" + title + "'");
    }
  }
  return context;
}

}  // namespace drift
