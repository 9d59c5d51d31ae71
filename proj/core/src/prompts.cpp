/*
 * Copyright 2026 The adlab Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <string>
#include <string_view>
#include <vector>

#include "adlab/augment.hpp"
#include "adlab/error.hpp"
#include "adlab/modelsel.hpp"
#include "adlab/zeroshot.hpp"
#include "text.hpp"

namespace adlab {
namespace {

constexpr std::string_view kEscapeRule =
    "    - Add a backslash (\\) before any double quotation marks (\") within the values of "
    "JSON output for proper parsing (i.e., from \" to \\\"), and ensure that single quotation "
    "marks (') are preserved without escaping.";

constexpr std::string_view kJsonTail = "Response in JSON format:";

class Lines {
 public:
  Lines& add(std::string_view line) {
    out_.append(line);
    out_.push_back('\n');
    return *this;
  }
  Lines& blank() { return add(""); }
  std::string str() const { return out_; }

 private:
  std::string out_;
};

std::string bold_bullet(const CategoryEntry& e) {
  std::string s = "- **" + e.name + "**";
  if (e.description) s += ": " + *e.description;
  return s;
}

std::string plain_bullet(const CategoryEntry& e) {
  std::string s = "- " + e.name;
  if (e.description) s += ": " + *e.description;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Zero-shot detection

std::string build_detection_prompt(const Sample& sample, const PromptContext& ctx,
                                   DetectionSetting setting) {
  validate_context(ctx, setting);
  const bool with_anomaly = setting == DetectionSetting::kNormalPlusAnomaly;
  Lines p;
  p.add("You are an intelligent and professional assistant that detects anomalies in text data.")
      .add("## Task:")
      .add("- Following the rules below, determine whether the given text sample is an anomaly. "
           "Provide a brief explanation of your reasoning and assign an anomaly confidence score "
           "between 0 and 1.")
      .blank()
      .add("## Categories:");
  if (with_anomaly) p.add("### Normal Category(ies):");
  for (const auto& c : ctx.normal) p.add(bold_bullet(c));
  if (with_anomaly) {
    p.add("### Anomaly Category(ies):");
    p.add(plain_bullet(*ctx.anomaly));
  }
  p.blank().add("## Rules:").add("1. **Anomaly Definition**:");
  if (with_anomaly) {
    p.add("    - A text sample is considered an **anomaly** if it belongs to the **anomaly "
          "category(ies)** rather than **any of the normal category(ies)** listed above.");
  } else {
    p.add("    - A text sample is considered an **anomaly** if it does **not** belong to **any "
          "of the categories** listed above.");
  }
  p.add("2. **Scoring**:")
      .add("    - Assign an anomaly confidence score between 0 and 1.")
      .add("    - Use higher scores when you are highly confident in your decision.")
      .add("    - Use lower scores when you are uncertain or think the text sample is **not** an "
           "anomaly.")
      .add("3. **Step-by-step Reasoning** (Chain of Thought):")
      .add("    - **Step 1**. Read the entire text sample carefully and understand it thoroughly.")
      .add("    - **Step 2**. Analyze the text sample by comparing its content to each category "
           "listed in the \"Categories\" section above, considering factors such as main topics, "
           "meanings, background, sentiments, etc.")
      .add("    - **Step 3**. Determine which category the text sample **most closely aligns "
           "with**.");
  if (with_anomaly) {
    p.add("        - If it **most closely aligns with** **any of the anomaly category(ies)**, it "
          "is an **anomaly**.");
    p.add("        - If it **most closely aligns with** **any of the normal category(ies)** "
          "instead, it is **not** an anomaly.");
  } else {
    p.add("        - If it aligns with any category, it is **not** an anomaly.");
    p.add("        - If it does **not** align with any category, it is an anomaly.");
  }
  p.add("    - **Step 4**. Assign an anomaly confidence score based on how confident you are that "
        "the text sample is an anomaly.")
      .add("4. **Additional Notes**:")
      .add("    - A text sample may relate to multiple categories, but it should be classified "
           "into the **most relevant** one in this task.")
      .add("    - If you are uncertain whether the text sample **significantly aligns** with **any "
           "of the anomaly category(ies)**, assume that it does **not**, which means it is "
           "**not** an anomaly.")
      .add("5. **Response Format**:")
      .add("    - Provide responses in a strict **JSON** format with the keys \"reason\" and "
           "\"anomaly_score.\"")
      .add("        - \"reason\": Your brief explanation of the reasoning in one to three "
           "sentences logically.")
      .add("        - \"anomaly_score\": Your anomaly confidence score between 0 and 1.")
      .add("    - Ensure the JSON output is correctly formatted, including correct placement of "
           "commas between key-value pairs.")
      .add(kEscapeRule)
      .add("Text sample:")
      .add("\"" + sample.text + "\"")
      .blank()
      .add(kJsonTail)
      .blank();
  return p.str();
}

// ---------------------------------------------------------------------------
// Synthetic samples

std::string build_keyword_prompt(const DatasetSpec& spec, std::size_t t,
                                 const std::string& suffix) {
  const std::string n = std::to_string(t);
  Lines p;
  p.add("You are an intelligent and professional assistant that generates groups of keywords "
        "for given categories in a dataset.")
      .add("## Task:")
      .add("- Following the rules below, generate **exactly** " + n +
           " unique keyword groups for **each given category** according to your understanding "
           "of the category (and its description).")
      .add("- Each keyword group will be used to generate synthetic data for the corresponding "
           "category.")
      .blank()
      .add("## Rules:")
      .add("1. **Keyword Group Generation**:")
      .add("    - For **each given category**, generate **exactly** " + n +
           " keyword groups. Each group should contain exactly three keywords, with different "
           "levels of granularity: one broad/general, one intermediate, and one fine-grained.")
      .add("    - Ensure that the three keywords in each group are thematically related to each "
           "other and align with the category's description.")
      .add("    - Avoid redundancy or overly similar keywords across different groups.")
      .add("    - Ensure that each group is unique and relevant to the key topics described in "
           "the category.")
      .add("2. **Granularity**:")
      .add("    - The first keyword should be broad/general, representing a high-level or "
           "overarching topic.")
      .add("    - The second keyword should be intermediate, more specific than the first, but "
           "not overly narrow.")
      .add("    - The third keyword should be fine-grained and specific, related to detailed "
           "subtopics or precise aspects of the category.")
      .add("3. **Response Format**:")
      .add("    - For each given category, provide the keyword groups as a list, where each entry "
           "is a group of three keywords (broad, intermediate, fine-grained).")
      .add("    - Structure the response so that the key is the category name, and the value is "
           "a list of generated keyword groups.")
      .add("    - Ensure the JSON output is properly formatted, including correct placement of "
           "commas between key-value pairs and no missing brackets.")
      .add(kEscapeRule)
      .blank()
      .add("The \"" + spec.name + "\" dataset's original task is " + spec.original_task +
           ". It contains the following category(ies):");
  for (const auto& c : spec.normal_categories) p.add(c);
  p.blank().add(kJsonTail).blank();
  if (!suffix.empty()) p.add(suffix);
  return p.str();
}

std::string build_sample_prompt(const KeywordGroup& group, const DatasetSpec& spec) {
  Lines p;
  p.add("You are an intelligent and professional assistant that generates a synthetic text "
        "sample based on a group of 3 keywords with different levels of granularity.")
      .add("## Task:")
      .add("- Generate a synthetic text sample that incorporates the provided group of 3 keywords "
           "(broad, intermediate, and fine-grained) listed below.")
      .add("- The generated sample should align with the meanings and themes suggested by the "
           "keywords provided.")
      .blank()
      .add("## Rules:")
      .add("1. **Sample Characteristics**:")
      .add("    - Generate a synthetic text sample that naturally incorporates the three provided "
           "keywords (broad, intermediate, and fine-grained).")
      .add("    - Ensure that the text sample is coherent and contextually relevant to the themes "
           "suggested by the keywords.")
      .add("2. **Keyword Usage**:")
      .add("    - The three keywords must appear naturally within the content.")
      .add("    - Ensure that the broad keyword sets the overall context, the intermediate keyword "
           "refines the discussion, and the fine-grained keyword offers more detailed insight "
           "into a specific subtopic.")
      .add("3. **Response Format**:")
      .add("    - Provide the generated sample as a single string response representing the text "
           "sample.")
      .add("    - Ensure the output is in a readable format.")
      .add("    - Do not include any additional messages or commentary.")
      .add(kEscapeRule)
      .blank()
      .add("The \"" + spec.name + "\" dataset's original task is " + spec.original_task +
           ". The category is \"" + group.category + "\", and the group of keywords to use is:")
      .add("- Broad: " + group.broad)
      .add("- Intermediate: " + group.intermediate)
      .add("- Fine-grained: " + group.fine)
      .blank()
      .add(kJsonTail)
      .blank();
  return p.str();
}

// ---------------------------------------------------------------------------
// Category descriptions

std::string build_description_prompt(const DatasetSpec& spec) {
  Lines p;
  p.add("You are an intelligent and professional assistant that generates descriptions for "
        "given categories in a text dataset.")
      .add("## Task:")
      .add("- Following the rules below, generate detailed textual descriptions that explain the "
           "main characteristics, typical topics, and common examples for each given category.")
      .blank()
      .add("## Rules:")
      .add("1. For each category, provide a continuous, coherent description in a single "
           "paragraph that includes:")
      .add("    - **Definition or overview**: Start by briefly defining or describing the category "
           "in one to two sentences. If you list multiple aspects or features in the definition "
           "(such as related fields or industries), ensure you append expressions like \"etc.\" "
           "or \"and so on\" to indicate that the list is not exhaustive.")
      .add("    - **Main topics or subjects**: Highlight the typical topics or subjects covered by "
           "this category. Ensure that you use phrases like \"etc.\" or \"and so on\" at the end "
           "of each list to indicate that the list is not exhaustive.")
      .add("- **Relevant examples**: Mention examples of content that belong to this category. "
           "Also, use expressions like \"etc.\" or \"and so on\" at the end of the list to show "
           "that these are illustrative, not exhaustive.")
      .add("2. Use **step-by-step reasoning** to ensure the descriptions are logical and clear.")
      .add("3. Each description should be clear, coherent, and helpful for someone unfamiliar "
           "with the dataset and the task.")
      .add("4. Always append phrases like \"etc.\" or \"and so on\" to lists or enumerations of "
           "examples, topics, or aspects, **including the definition part**.")
      .add("5. Response Format:")
      .add("    - Provide a response where each key is the category name, and the value is the "
           "corresponding description as a continuous paragraph.")
      .add("    - Ensure the JSON output is correctly formatted, including correct placement of "
           "commas between key-value pairs.")
      .add(kEscapeRule)
      .blank()
      .add("The \"" + spec.name + "\" dataset's original task is " + spec.original_task +
           ". It contains the following categories:");
  for (const auto& c : spec.normal_categories) p.add(c);
  p.add(spec.anomaly_category).blank().add(kJsonTail).blank();
  return p.str();
}

// ---------------------------------------------------------------------------
// Model selection

std::string build_ums_prompt(const UmsContext& ctx, bool no_context) {
  struct Option {
    const char* label;
    const char* key;
    bool embedding;
    const char* separator;
  };
  static constexpr Option kModelLines[] = {
      {"AutoEncoder (AE)", "AE", false, ": "},
      {"Deep Support Vector Data Description (DeepSVDD)", "DeepSVDD", false, ": "},
      {"Empirical-Cumulative-Distribution-Based Outlier Detection (ECOD)", "ECOD", false, ":"},
      {"Isolation Forest (IForest)", "IForest", false, ": "},
      {"Local Outlier Factor (LOF)", "LOF", false, ": "},
      {"Unifying Local Outlier Detection Methods via Graph Neural Networks (LUNAR)", "LUNAR",
       false, ": "},
      {"Single-Objective Generative Adversarial Active Learning (SO-GAAL)", "SO-GAAL", false, ": "},
      {"Variational AutoEncoder (VAE)", "VAE", false, ": "},
  };
  static constexpr Option kEmbeddingLines[] = {
      {"Bidirectional Encoder Representations from Transformers (BERT)", "BERT", true, ": "},
      {"\"text-embedding-3-large\" from OpenAI (referred to as OpenAI)", "OpenAI", true, ": "},
  };
  const auto abstract_line = [&](const Option& o) {
    const auto& table = o.embedding ? ctx.abstracts.embeddings : ctx.abstracts.detectors;
    auto it = table.find(o.key);
    if (it == table.end() || text::trim(it->second).empty()) {
      throw InvalidArgument(std::string("missing abstract for ") + o.key);
    }
    return std::string("- ") + o.label + o.separator + it->second;
  };

  Lines p;
  p.add("You are an expert in model selection for anomaly detection on text datasets.")
      .blank()
      .add("## Task:")
      .add("- Given the information of a dataset and a set of models, select the model you "
           "believe will achieve the best performance for detecting anomalies in this dataset. "
           "Provide a brief explanation of your choice.")
      .blank();
  if (!no_context) {
    validate_spec(ctx.spec);
    std::string normals;
    for (std::size_t i = 0; i < ctx.spec.normal_categories.size(); ++i) {
      if (i) normals += ", ";
      normals += ctx.spec.normal_categories[i];
    }
    p.add("## Dataset Information:")
        .add("- Dataset Name: " + ctx.spec.name)
        .add("- Dataset Size: " + std::to_string(ctx.size))
        .add("- Background: This dataset is originally for " + ctx.spec.original_task + ".")
        .add("- Data Structure: Textual data with multiple categories. One category is considered "
             "anomalous, while the others are normal.")
        .add("    - Normal Category(ies): " + normals)
        .add("        - An Example: " + ctx.normal_example.text)
        .add("    - Anomaly Category: " + ctx.spec.anomaly_category)
        .add("        - An Example: " + ctx.anomaly_example.text)
        .add("- Text Length Statistics:")
        .add("    - Average Length: " + text::format_fixed(ctx.stats.avg, 1))
        .add("    - Maximum Length: " + std::to_string(ctx.stats.max))
        .add("    - Minimum Length: " + std::to_string(ctx.stats.min))
        .add("    - Standard Deviation: " + text::format_fixed(ctx.stats.std, 1))
        .blank()
        .add("## Model Information:")
        .add("- Models utilize language models to generate embeddings and feed the embeddings "
             "into the models.")
        .add("- We provide the abstracts of the papers that introduce the models for your "
             "reference.")
        .add("### Model Options:");
    for (const auto& o : kModelLines) p.add(abstract_line(o));
    p.add("### Embedding Options:");
    for (const auto& o : kEmbeddingLines) p.add(abstract_line(o));
    p.blank();
  }
  std::string options = "1. Availabel options include ";
  const auto& ids = canonical_options();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) options += ", ";
    options += "\"" + ids[i] + (i + 1 == ids.size() ? ".\"" : "\"");
  }
  p.add("## Rules:")
      .add(options)
      .add("2. Treat all models equally and evaluate them based on their compatibility with the "
           "dataset characteristics and the anomaly detection task.")
      .add("3. Response Format:")
      .add("    - Provide responses in a strict **JSON** format with the keys \"reason\" and "
           "\"choice.\"")
      .add("        - \"reason\": Your explanation of the reasoning.")
      .add("        - \"choice\": The model you have selected for anomaly detection in this "
           "dataset.")
      .blank()
      .add(kJsonTail)
      .blank();
  return p.str();
}

}  // namespace adlab
