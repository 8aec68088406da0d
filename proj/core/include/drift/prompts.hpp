#pragma once

#include <optional>
#include <string>
#include <vector>

#include "drift/types.hpp"

namespace drift {

struct PromptSpec {
  TaskKind task_kind = TaskKind::EXTRACTIVE;
  PromptMode mode = PromptMode::WITH_CONTEXT;
  std::string template_id;
  std::string rendered;
};

// Frozen zero-shot template for (task_kind, mode) with {passage} and
// {question} slots unfilled. Three with-context families (extractive,
// yes/no, free-form — MULTIHOP shares the free-form family) and three
// question-only parametric families. TemplateMissing if unknown.
const std::string& prompt_template(TaskKind task_kind, PromptMode mode);

// Suffix appended for WITH_CONTEXT_COT; scoring reads only the text after
// the final "Answer:" marker when present.
extern const std::string kCotSuffix;

// Renders the template: passage between the triple quotes, question after
// "Question:". Passage must be present iff mode is not QUESTION_ONLY.
PromptSpec build_prompt(const QAInstance& instance, const std::optional<std::string>& passage,
                        PromptMode mode);

// MULTIHOP context assembly: per-article blocks in the instance's original
// title order, each block "title\n" + its paragraphs joined by newlines,
// blocks separated by blank lines. Each edit replaces the paragraph equal
// to its original_paragraph within its title's block; untouched paragraphs
// stay verbatim. UnknownTitle when an edit names a non-gold title or its
// original paragraph is not found.
std::string assemble_context(const QAInstance& instance,
                             const std::vector<EditedVariant>& edits);

}  // namespace drift
