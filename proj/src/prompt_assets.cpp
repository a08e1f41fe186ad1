/// @file prompt_assets.cpp
/// @brief The two generation prompt templates plus the default editable
///        assets. The assets/ directory in the repository carries the same
///        text; a unit test keeps the two in sync.
#include "sapphire/llm_gateway.hpp"

namespace sapphire::llm {

namespace {

// Hypothetical-model generation. One call covers all seven constructs; the
// reasoning steps push the model through the causal chain before it answers.
const std::string kTauTemplate =
    R"TPL(You are a helpful assistant. Your job is to create knowledge regarding any given artificial or natural system description by using an ontology named ‘SAPPhIRE’.
The acronym ‘SAPPhIRE’ stands for the following constructs: ‘State changes’ (S), ‘Actions’ (A), ‘Parts’ (P), ‘physical Phenomena’ (Ph), ‘Inputs’ (I), ‘oRgans’ (R), ‘physical Effects’ (E).
###
Following are the definitions of the ‘SAPPhIRE’ constructs:
{Definitions of the SAPPhIRE constructs}
###
A brief explanation of the workings of these constructs is given below:
‘Parts’ are necessary for creating ‘oRgans’. ‘oRgans’ and ‘Inputs’ are necessary for activation of ‘physical Effects’, which in turn is necessary for creating ‘physical Phenomena’ and ‘State changes’. ‘State changes’ are interpreted as ‘Actions’, which describe the overall purpose of the system.
###
Important Note: Here, all the ‘physical Phenomena’ should be governed by corresponding ‘physical Effects’ which are valid scientific laws, principles, or theories from engineering science or natural science domain.
###
You are given the following ‘System’:
{System name}
###
Think step by step to generate appropriate knowledge that will be helpful to create the ‘SAPPhIRE’ constructs of the given ‘System’:
{Reasoning steps}
###
{Output format instructions})TPL";

// Per-construct corrected-answer generation, grounded in retrieved context.
const std::string kRhoTemplate =
    R"TPL(You are a helpful assistant. Your task is to provide relevant information about any specified `SAPPhIRE` ontology construct related to a given artificial or natural system. You must use only the information provided to you in the `Context` section. Ensure that your responses are accurate, concise, and directly relevant to the query.
###
The acronym `SAPPhIRE` stands for the following constructs: `State changes` (S), `Actions` (A), `Parts` (P), `physical Phenomena` (Ph), `Inputs` (I), `oRgans` (R), `physical Effects` (E).
###
Following are the definitions of the `SAPPhIRE` constructs:
{Definitions of the SAPPhIRE constructs}
###
The relationships between these constructs are given below:
`Parts` are necessary for creating `oRgans`. `oRgans` and `Inputs` are necessary for activation of `physical Effects`, which in turn is necessary for creating `physical Phenomena` and `State changes`. `State changes` are interpreted as `Actions`, which describe the overall purpose of the system.
###
Important Note: Here, all the `physical Phenomena` should be governed by corresponding `physical Effects` which are valid scientific laws, principles, or theories from engineering science or natural science domain.
###
Your users are asking you to correct the `Hypothetical Answer` that was generated for a particular `Query` related to a particular `SAPPhIRE` construct of the given `System`.
You will be shown the `System`, `Query`, `Hypothetical Answer`, and the relevant `Context`. Correct the `Hypothetical Answer` provided by the user. You must use only the information provided to you in the `Context` section. Keep your answer grounded in the facts of the `Context`. Make sure the `Corrected Answer` is as concise as the `Hypothetical Answer`.
###
`System`: {system name}

`Query`: {query}

`Hypothetical Answer`: {hypothetical_answer}

`Context`: {context_str}.

`Corrected Answer`:)TPL";

const std::string kDefinitions =
    R"TXT(‘State changes’ (S): Changes in the properties of the system and its environment, at given instants of time, that are involved in achieving the overall function of the system.
‘Actions’ (A): Abstract descriptions or high-level interpretations of the state changes; an action describes the overall purpose accomplished by the system.
‘Parts’ (P): The set of physical components and interfaces that constitute the system and its environment of interaction.
‘physical Phenomena’ (Ph): The observable interactions between the system and its environment that take place when the physical effects are activated.
‘Inputs’ (I): The physical quantities, in the form of energy, material, or information, that cross the system boundary and are required, together with the organs, to activate the physical effects.
‘oRgans’ (R): The structural contexts, properties, and conditions of the system and its environment that are necessary for the physical effects to be activated.
‘physical Effects’ (E): The laws and principles of nature (valid scientific laws, principles, or theories) that govern the interactions between the system and its environment.)TXT";

// Steps follow the causal chain (Parts -> oRgans -> Inputs -> Effects ->
// Phenomena -> State changes -> Actions) rather than the acronym order.
const std::string kReasoningSteps =
    R"TXT(1. Generate knowledge about the ‘Parts’ by analysing all possible components and interfaces that constitute the system and its environment. Parts are generally ‘Material Nouns’ representing material entities of the system and its environment.
2. Generate knowledge about the ‘oRgans’ by analysing all structural contexts, properties, and conditions of the parts that are necessary for the system to work. oRgans generally describe the enabling conditions created by the parts.
3. Generate knowledge about the ‘Inputs’ by analysing all physical quantities, in the form of energy, material, or information, that cross the system boundary from the environment. Inputs are generally ‘Physical Quantities’ supplied to the system.
4. Generate knowledge about the ‘physical Effects’ by analysing all scientific laws, principles, or theories that are activated when the oRgans and Inputs come together. physical Effects must be valid laws, principles, or theories from the engineering science or natural science domain.
5. Generate knowledge about the ‘physical Phenomena’ by analysing all observable interactions between the system and its environment that are governed by the physical Effects.
6. Generate knowledge about the ‘State changes’ by analysing all changes in the properties of the system and its environment that occur as a consequence of the physical Phenomena.
7. Generate knowledge about the ‘Actions’ by analysing the overall purpose of the system as an abstract interpretation of the State changes.)TXT";

const std::string kFormatInstructions =
    R"TXT(Return your final answer as a single JSON object with exactly the following seven keys: "StateChanges", "Actions", "Parts", "Phenomena", "Inputs", "Organs", "Effects". The value of every key must be a single non-empty string that summarises the corresponding construct for the given system. Do not add any other keys, commentary, or markdown code fences around the final JSON object.)TXT";

const std::string kJudgeGroundedness =
    R"TXT(You are an impartial judge. Decide whether the statement below is supported by the provided context. Use only the information in the context; do not rely on outside knowledge.

Context:
{context_str}

Statement:
{statement}

Is the statement supported by the context? Answer (yes or no):)TXT";

const std::string kJudgeAnswerRelevance =
    R"TXT(You are an impartial judge. Rate how relevant the answer is to the query, on an integer scale from 0 (completely irrelevant) to 10 (completely relevant). Respond with the number only.

Query:
{query}

Answer:
{answer}

Relevance score (0-10):)TXT";

const std::string kJudgeContextRelevance =
    R"TXT(You are an impartial judge. Rate how relevant the context passage is to the query, on an integer scale from 0 (completely irrelevant) to 10 (completely relevant). Respond with the number only.

Query:
{query}

Context passage:
{passage}

Relevance score (0-10):)TXT";

}  // namespace

const std::string& tau_template() { return kTauTemplate; }

const std::string& rho_template() { return kRhoTemplate; }

PromptAssets PromptAssets::defaults() {
    PromptAssets assets;
    assets.definitions = kDefinitions;
    assets.reasoning_steps = kReasoningSteps;
    assets.format_instructions = kFormatInstructions;
    assets.judge_groundedness = kJudgeGroundedness;
    assets.judge_answer_relevance = kJudgeAnswerRelevance;
    assets.judge_context_relevance = kJudgeContextRelevance;
    return assets;
}

}  // namespace sapphire::llm
