#include "ramc/prompting.hpp"

namespace ramc {

const char* const kGraphSeparator = "\n\n$$\n---\n";

namespace {

// Instruction texts are load-bearing bytes (trailing spaces included); do not
// reflow or "fix" them.
const char* const kSingleEdgeInstruction =
    R"__ramc(You are an assistant that is given a list of change graphs in an edge format. That is, the graph is given edge by edge. The graphs are directed, labeled graphs. An edge is serialized as
"e src_id tgt_id edge_label src_label tgt_label"

Labels are dictionaries. If a node appears in more than one edge, the second time it appears it is replaced by "_" to avoid repetition. 

E.g.:
e 0 1 a b bar
e 1 2 bla _ foo

The second edge here would be equivalent to:
"e 1 2 bla bar foo"

There are some change graphs given as examples. Graphs are separated by "\n\n$$\n---\n".

The last graph in this list of graphs is not yet complete. Exactly one edge is missing. 
Your task is it, to complete the last graph by guessing the last edge. You can guess this typically by looking at the examples and trying to deduce the patterns in the examples. Give this missing edge in the format
"e src_id tgt_id edge_label src_label tgt_label". Note that the beginning "e" is already part of the prompt.)__ramc";

const char* const kMultiEdgeInstruction =
    R"__ramc(You are an assistant that is given a list of change graphs in an edge format. That is, the graph is given edge by edge. The graphs are directed, labeled graphs. An edge is serialized as
"e src_id tgt_id edge_label src_label tgt_label"

Labels are dictionaries or concatenations of change type and node/edge type. If a node appears in more than one edge, the second time it appears it can be replaced by "_" to avoid repetition. 

E.g.:
e 0 1 a b bar
e 1 2 bla _ foo

The second edge here would be equivalent to:
"e 1 2 bla bar foo"

There are some change graphs given as examples. Graphs are separated by "\n\n$$\n---\n".

The last graph in this list of graphs is not yet complete. Some edges are missing. 
Your task is it, to complete the last graph by guessing the missing edges. You can guess this typically by looking at the examples and trying to deduce the patterns in the examples. Give the missing edges in the format
"e src_id tgt_id edge_label src_label tgt_label". Note that the beginning "e" is already part of the prompt. After the last edge of the change graph, add two new lines.)__ramc";

}  // namespace

const PromptTemplate& single_edge_template() {
  static const PromptTemplate tpl{PromptMode::SingleEdge, kSingleEdgeInstruction};
  return tpl;
}

const PromptTemplate& multi_edge_template() {
  static const PromptTemplate tpl{PromptMode::MultiEdge, kMultiEdgeInstruction};
  return tpl;
}

int estimate_tokens(const std::string& text, const TokenCounter& counter) {
  if (counter) return counter(text);
  return static_cast<int>((text.size() + 3) / 4);
}

AssembledPrompt build_prompt(const PromptTemplate& tpl, const std::vector<FewShot>& fewShots,
                             const std::string& partialText, int budgetTokens, PromptStyle style,
                             const TokenCounter& counter) {
  if (partialText.empty()) throw PromptError("build_prompt: partial serialization is empty");

  const std::string cue =
      (style == PromptStyle::Completion && tpl.mode == PromptMode::SingleEdge) ? "\ne " : "";

  auto assemble_body = [&](std::size_t n) {
    std::string body;
    for (std::size_t i = 0; i < n; ++i) {
      body += fewShots[i].text;
      body += kGraphSeparator;
    }
    body += partialText;
    body += cue;
    return body;
  };

  const std::string bare = tpl.instructionText + "\n\n" + assemble_body(0);
  if (estimate_tokens(bare, counter) > budgetTokens)
    throw PromptError("build_prompt: instruction and partial alone exceed the token budget (" +
                      std::to_string(estimate_tokens(bare, counter)) + " > " +
                      std::to_string(budgetTokens) + ")");

  std::size_t used = fewShots.size();
  std::string body = assemble_body(used);
  std::string text = tpl.instructionText + "\n\n" + body;
  while (used > 0 && estimate_tokens(text, counter) > budgetTokens) {
    --used;  // drop from the end: least similar first
    body = assemble_body(used);
    text = tpl.instructionText + "\n\n" + body;
  }

  AssembledPrompt out;
  out.text = std::move(text);
  out.instructionText = tpl.instructionText;
  out.bodyText = std::move(body);
  for (std::size_t i = 0; i < used; ++i) out.fewShotIdsUsed.push_back(fewShots[i].id);
  out.droppedCount = static_cast<int>(fewShots.size() - used);
  out.estimatedTokens = estimate_tokens(out.text, counter);
  out.mode = tpl.mode;
  out.style = style;
  return out;
}

}  // namespace ramc
