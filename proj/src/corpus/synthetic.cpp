//
// Copyright 2026 The advnlu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "advnlu/corpus/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "advnlu/corpus/bio.hpp"
#include "advnlu/error.hpp"

namespace advnlu::corpus {
namespace {

using json = nlohmann::json;

constexpr const char* kDefaultGrammar = R"json({
  "intents": {
    "weather/find": [
      "what's the weather in {location} {datetime}",
      "weather in {location} {datetime}",
      "weather for {location}",
      "show me the weather {datetime}",
      "tell me the {weather_attribute} in {location} {datetime}",
      "what's the {weather_attribute} {datetime}",
      "how is the weather in {location}",
      "will there be {weather_attribute} in {location} {datetime}"
    ],
    "weather/check_sunset": [
      "when is sunset {datetime}",
      "sunset in {location} {datetime}",
      "sunset for {location}",
      "what time is sunset in {location}",
      "tell me the sunset time {datetime}",
      "when is sunset in {location} {datetime}"
    ],
    "alarm/set_alarm": [
      "set an alarm for {datetime}",
      "set my alarm for {datetime}",
      "wake me up at {datetime}",
      "set the {alarm_name} alarm for {datetime}",
      "create an alarm at {datetime} called {alarm_name}",
      "set an alarm in {duration}"
    ],
    "alarm/cancel_alarm": [
      "cancel my alarm for {datetime}",
      "cancel the {alarm_name} alarm",
      "delete my alarm at {datetime}",
      "turn off my {alarm_name} alarm",
      "remove all alarms",
      "cancel all alarms {datetime}"
    ],
    "alarm/snooze_alarm": [
      "snooze the alarm for {duration}",
      "snooze for {duration}",
      "snooze my alarm for {duration}",
      "snooze the {alarm_name} alarm",
      "snooze the {alarm_name} alarm for {duration}"
    ],
    "alarm/show_alarms": [
      "show my alarms",
      "show my alarm for {datetime}",
      "what alarms do i have {datetime}",
      "list all alarms",
      "do i have a {alarm_name} alarm",
      "show the {alarm_name} alarm"
    ]
  },
  "lexicons": {
    "location": ["sydney", "london", "paris", "seattle", "portland", "new york",
                 "san francisco", "tokyo", "berlin", "chicago", "boston", "denver",
                 "miami", "toronto", "dublin", "madrid", "austin", "mumbai",
                 "cairo", "oslo"],
    "datetime": ["today", "tomorrow", "tonight", "this weekend", "monday",
                 "tuesday", "friday morning", "next week", "7 am", "6 30 am",
                 "noon", "9 pm", "tomorrow morning", "sunday evening", "5 am",
                 "8 am", "midnight", "saturday", "this evening",
                 "wednesday afternoon"],
    "duration": ["5 minutes", "10 minutes", "15 minutes", "half an hour",
                 "an hour", "2 minutes", "20 minutes", "30 seconds"],
    "alarm_name": ["gym", "school", "work", "medicine", "meeting", "yoga",
                   "nap", "laundry"],
    "weather_attribute": ["temperature", "humidity", "wind", "rain", "snow",
                          "high", "low", "uv index"]
  },
  "rules": [
    {"kind": "synonym", "from": "weather", "to": ["conditions", "climate"]},
    {"kind": "synonym", "from": "forecast", "to": ["outlook", "prediction"]},
    {"kind": "synonym", "from": "sunset", "to": ["dusk", "sundown"]},
    {"kind": "synonym", "from": "cancel", "to": ["abort", "call off"]},
    {"kind": "synonym", "from": "delete", "to": ["erase"]},
    {"kind": "synonym", "from": "remove", "to": ["clear"]},
    {"kind": "synonym", "from": "set an alarm", "to": ["make an alarm", "put an alarm"]},
    {"kind": "synonym", "from": "snooze", "to": ["delay", "postpone"]},
    {"kind": "synonym", "from": "show", "to": ["display"]},
    {"kind": "synonym", "from": "list", "to": ["enumerate"]},
    {"kind": "synonym", "from": "alarms", "to": ["alerts"]},
    {"kind": "synonym", "from": "wake me up", "to": ["get me up", "rouse me"]},
    {"kind": "synonym", "from": "tell me", "to": ["let me know"]},
    {"kind": "reorder", "from": "set an alarm for", "to": ["i want an alarm for", "i need an alarm set for"]},
    {"kind": "reorder", "from": "wake me up at", "to": ["i need to wake up at"]},
    {"kind": "reorder", "from": "cancel my alarm", "to": ["i want my alarm canceled"]},
    {"kind": "reorder", "from": "show my alarms", "to": ["i want to see my alarms"]},
    {"kind": "reorder", "from": "snooze the alarm", "to": ["i want the alarm snoozed"]},
    {"kind": "reorder", "from": "what's the weather", "to": ["i wonder what the weather is"]},
    {"kind": "reorder", "from": "when is sunset", "to": ["sunset happens when"]},
    {"kind": "filler", "position": "start", "to": ["please", "hey", "could you", "um", "okay"]}
  ]
})json";

std::vector<std::string> Words(const std::string& phrase) {
  std::vector<std::string> out;
  std::istringstream in(phrase);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool IsPlaceholder(const std::string& token) {
  return token.size() > 2 && token.front() == '{' && token.back() == '}';
}

std::string PlaceholderLabel(const std::string& token) {
  return token.substr(1, token.size() - 2);
}

bool ContainsPhrase(const std::vector<std::string>& tokens,
                    const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) !=
         tokens.end();
}

struct Sentence {
  std::vector<std::string> tokens;
  TagSequence tags;
  std::string intent;
};

Sentence Realize(const SyntheticGrammar& g, std::size_t intent_index,
                 const std::string& tmpl, std::mt19937_64& rng) {
  Sentence s;
  s.intent = g.intents[intent_index].intent;
  for (const std::string& tok : Words(tmpl)) {
    if (!IsPlaceholder(tok)) {
      s.tokens.push_back(tok);
      s.tags.emplace_back(kOutsideTag);
      continue;
    }
    const std::string label = PlaceholderLabel(tok);
    const auto& values = g.lexicons.at(label);
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    const auto words = Words(values[pick(rng)]);
    for (std::size_t i = 0; i < words.size(); ++i) {
      s.tokens.push_back(words[i]);
      s.tags.push_back((i == 0 ? "B-" : "I-") + label);
    }
  }
  return s;
}

LabeledExample ToExample(const Sentence& s, const std::string& id) {
  LabeledExample ex;
  ex.utterance.id = id;
  ex.utterance.tokens = s.tokens;
  ex.utterance.text = JoinTokens(s.tokens);
  ex.annotation.intent = s.intent;
  ex.annotation.slots = BioToSpans(s.tags);
  return ex;
}

std::string NumberedId(const std::string& prefix, std::size_t n) {
  std::string digits = std::to_string(n);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return prefix + "-" + digits;
}

}  // namespace

const char* TransformKindName(TransformKind kind) {
  switch (kind) {
    case TransformKind::kSynonym: return "synonym";
    case TransformKind::kReorder: return "reorder";
    case TransformKind::kFiller: return "filler";
  }
  return "synonym";
}

std::vector<std::string> SyntheticGrammar::SlotLabels() const {
  std::vector<std::string> labels;
  for (const auto& [label, values] : lexicons) labels.push_back(label);
  return labels;
}

SyntheticGrammar DefaultGrammar() { return ParseGrammarJson(kDefaultGrammar); }

SyntheticGrammar ParseGrammarJson(const std::string& json_text) {
  SyntheticGrammar g;
  try {
    const json doc = json::parse(json_text);
    for (const auto& [intent, templates] : doc.at("intents").items()) {
      IntentTemplates it;
      it.intent = intent;
      for (const auto& t : templates) it.templates.push_back(t.get<std::string>());
      g.intents.push_back(std::move(it));
    }
    for (const auto& [label, values] : doc.at("lexicons").items()) {
      auto& lex = g.lexicons[label];
      for (const auto& v : values) lex.push_back(v.get<std::string>());
    }
    for (const auto& r : doc.at("rules")) {
      TransformRule rule;
      const std::string kind = r.at("kind").get<std::string>();
      if (kind == "synonym") {
        rule.kind = TransformKind::kSynonym;
      } else if (kind == "reorder") {
        rule.kind = TransformKind::kReorder;
      } else if (kind == "filler") {
        rule.kind = TransformKind::kFiller;
        rule.at_end = r.value("position", std::string("start")) == "end";
      } else {
        Fail(ErrorCode::kParse, "unknown rule kind '" + kind + "'");
      }
      if (rule.kind != TransformKind::kFiller) {
        rule.from = Words(r.at("from").get<std::string>());
        if (rule.from.empty()) Fail(ErrorCode::kParse, "rule with empty 'from'");
      }
      for (const auto& t : r.at("to")) {
        auto words = Words(t.get<std::string>());
        if (words.empty()) Fail(ErrorCode::kParse, "rule with empty 'to' phrase");
        rule.to.push_back(std::move(words));
      }
      if (rule.to.empty()) Fail(ErrorCode::kParse, "rule without alternatives");
      g.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("grammar: ") + e.what());
  }
  return g;
}

SyntheticGrammar LoadGrammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open grammar " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseGrammarJson(buf.str());
}

std::string GrammarToJson(const SyntheticGrammar& g) {
  json doc;
  doc["intents"] = json::object();
  for (const auto& it : g.intents) doc["intents"][it.intent] = it.templates;
  doc["lexicons"] = g.lexicons;
  doc["rules"] = json::array();
  for (const auto& r : g.rules) {
    json jr;
    jr["kind"] = TransformKindName(r.kind);
    if (r.kind == TransformKind::kFiller) {
      jr["position"] = r.at_end ? "end" : "start";
    } else {
      jr["from"] = JoinTokens(r.from);
    }
    jr["to"] = json::array();
    for (const auto& t : r.to) jr["to"].push_back(JoinTokens(t));
    doc["rules"].push_back(std::move(jr));
  }
  return doc.dump(2);
}

void ValidateGrammar(const SyntheticGrammar& g) {
  if (g.intents.size() < 4) {
    Fail(ErrorCode::kPrecondition, "grammar needs at least 4 intents");
  }
  if (g.lexicons.size() < 3) {
    Fail(ErrorCode::kPrecondition, "grammar needs at least 3 slot labels");
  }
  if (g.rules.empty()) {
    Fail(ErrorCode::kPrecondition, "grammar needs at least one transformation rule");
  }
  for (const auto& [label, values] : g.lexicons) {
    if (values.empty()) Fail(ErrorCode::kPrecondition, "empty lexicon for '" + label + "'");
  }
  for (const auto& it : g.intents) {
    if (it.templates.empty()) {
      Fail(ErrorCode::kPrecondition, "intent '" + it.intent + "' has no templates");
    }
    for (const auto& t : it.templates) {
      const auto words = Words(t);
      if (words.empty()) Fail(ErrorCode::kPrecondition, "empty template for " + it.intent);
      for (const auto& w : words) {
        if (IsPlaceholder(w) && !g.lexicons.count(PlaceholderLabel(w))) {
          Fail(ErrorCode::kPrecondition, "template '" + t + "' uses unknown slot " + w);
        }
      }
      for (const auto& r : g.rules) {
        if (r.kind == TransformKind::kFiller) continue;
        for (const auto& alt : r.to) {
          if (ContainsPhrase(words, alt)) {
            Fail(ErrorCode::kPrecondition, "template '" + t +
                                               "' already contains rule output '" +
                                               JoinTokens(alt) + "'");
          }
        }
      }
    }
  }
}

std::vector<TransformSite> FindSites(const std::vector<TransformRule>& rules,
                                     std::size_t rule_index,
                                     const std::vector<std::string>& tokens,
                                     const TagSequence* tags) {
  std::vector<TransformSite> sites;
  const TransformRule& rule = rules.at(rule_index);
  if (rule.kind == TransformKind::kFiller) {
    for (std::size_t a = 0; a < rule.to.size(); ++a) {
      sites.push_back({rule_index, a, rule.at_end ? tokens.size() : 0});
    }
    return sites;
  }
  const std::size_t n = rule.from.size();
  if (n > tokens.size()) return sites;
  for (std::size_t pos = 0; pos + n <= tokens.size(); ++pos) {
    if (!std::equal(rule.from.begin(), rule.from.end(), tokens.begin() + pos)) continue;
    if (tags != nullptr &&
        !std::all_of(tags->begin() + pos, tags->begin() + pos + n,
                     [](const std::string& t) { return t == kOutsideTag; })) {
      continue;
    }
    for (std::size_t a = 0; a < rule.to.size(); ++a) {
      sites.push_back({rule_index, a, pos});
    }
  }
  return sites;
}

void ApplySite(const std::vector<TransformRule>& rules, const TransformSite& site,
               std::vector<std::string>& tokens, TagSequence* tags) {
  const TransformRule& rule = rules.at(site.rule);
  const auto& alt = rule.to.at(site.alternative);
  const std::size_t remove = rule.kind == TransformKind::kFiller ? 0 : rule.from.size();
  const auto pos = static_cast<std::ptrdiff_t>(site.position);
  tokens.erase(tokens.begin() + pos, tokens.begin() + pos + static_cast<std::ptrdiff_t>(remove));
  tokens.insert(tokens.begin() + pos, alt.begin(), alt.end());
  if (tags != nullptr) {
    tags->erase(tags->begin() + pos, tags->begin() + pos + static_cast<std::ptrdiff_t>(remove));
    tags->insert(tags->begin() + pos, alt.size(), std::string(kOutsideTag));
  }
}

SyntheticCorpus GenerateSynthetic(const SyntheticGrammar& grammar, std::uint64_t seed,
                                  std::size_t n_train, std::size_t n_dev,
                                  std::size_t n_test) {
  ValidateGrammar(grammar);
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  SyntheticCorpus corpus;
  std::vector<Sentence> test_sentences;

  const auto fill = [&](std::vector<LabeledExample>& split, std::size_t n,
                        const std::string& prefix, std::vector<Sentence>* keep) {
    std::uniform_int_distribution<std::size_t> pick_intent(0, grammar.intents.size() - 1);
    const std::size_t max_attempts = 200 * n + 1000;
    std::size_t attempts = 0;
    while (split.size() < n) {
      if (++attempts > max_attempts) {
        Fail(ErrorCode::kPrecondition,
             "grammar cannot supply " + std::to_string(n) + " distinct " + prefix +
                 " sentences");
      }
      const std::size_t i = pick_intent(rng);
      const auto& templates = grammar.intents[i].templates;
      std::uniform_int_distribution<std::size_t> pick_tmpl(0, templates.size() - 1);
      Sentence s = Realize(grammar, i, templates[pick_tmpl(rng)], rng);
      if (!seen.insert(JoinTokens(s.tokens)).second) continue;
      split.push_back(ToExample(s, NumberedId(prefix, split.size() + 1)));
      if (keep != nullptr) keep->push_back(std::move(s));
    }
  };
  fill(corpus.train, n_train, "train", nullptr);
  fill(corpus.dev, n_dev, "dev", nullptr);
  fill(corpus.test, n_test, "test", &test_sentences);

  std::bernoulli_distribution coin(0.5);
  for (std::size_t k = 0; k < test_sentences.size(); ++k) {
    Sentence s = test_sentences[k];
    std::vector<TransformSite> content, filler;
    for (std::size_t r = 0; r < grammar.rules.size(); ++r) {
      auto sites = FindSites(grammar.rules, r, s.tokens, &s.tags);
      auto& dst = grammar.rules[r].kind == TransformKind::kFiller ? filler : content;
      dst.insert(dst.end(), sites.begin(), sites.end());
    }
    bool changed = false;
    if (!content.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, content.size() - 1);
      ApplySite(grammar.rules, content[pick(rng)], s.tokens, &s.tags);
      changed = true;
    }
    if (!filler.empty() && (!changed || coin(rng))) {
      std::uniform_int_distribution<std::size_t> pick(0, filler.size() - 1);
      TransformSite site = filler[pick(rng)];
      if (grammar.rules[site.rule].at_end) site.position = s.tokens.size();
      ApplySite(grammar.rules, site, s.tokens, &s.tags);
      changed = true;
    }
    if (!changed) continue;
    LabeledExample ex = ToExample(s, NumberedId("perturbed", k + 1));
    ex.origin = Origin::kAdversarial;
    ex.parent_id = corpus.test[k].utterance.id;
    ex.source = "synthetic-perturbation";
    corpus.perturbed.push_back(std::move(ex));
  }
  return corpus;
}

}  // namespace advnlu::corpus
