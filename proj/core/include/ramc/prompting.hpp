#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ramc {

enum class PromptMode { SingleEdge, MultiEdge };
enum class PromptStyle { Chat, Completion };

struct PromptTemplate {
  PromptMode mode;
  std::string instructionText;
};

/// Instruction for the exactly-one-edge-missing task.
const PromptTemplate& single_edge_template();
/// Instruction for the some-edges-missing task.
const PromptTemplate& multi_edge_template();

/// The separator joining serialized graphs inside a prompt (real control
/// characters: blank line, $$, newline, ---, newline).
extern const char* const kGraphSeparator;

/// Pluggable token counter; the default estimates ceil(bytes/4).
using TokenCounter = std::function<int(const std::string&)>;

int estimate_tokens(const std::string& text, const TokenCounter& counter = {});

struct FewShot {
  std::string id;
  std::string text;  // EdgeList serialization
};

struct AssembledPrompt {
  std::string text;  // instruction + few-shots + partial (+ continuation cue)
  std::string instructionText;
  std::string bodyText;  // text minus the instruction (chat user message)
  std::vector<std::string> fewShotIdsUsed;
  int droppedCount = 0;
  int estimatedTokens = 0;
  PromptMode mode = PromptMode::MultiEdge;
  PromptStyle style = PromptStyle::Chat;
};

class PromptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Assembles instruction + separator-joined few-shots + partial serialization.
/// Few-shots are dropped from the end of the list (least similar first) until
/// the estimate fits the budget; throws PromptError when instruction + partial
/// alone exceed it (callers skip such oversized samples). In SingleEdge
/// completion style a trailing "\ne " continuation cue is appended.
AssembledPrompt build_prompt(const PromptTemplate& tpl, const std::vector<FewShot>& fewShots,
                             const std::string& partialText, int budgetTokens = 8000,
                             PromptStyle style = PromptStyle::Chat,
                             const TokenCounter& counter = {});

}  // namespace ramc
