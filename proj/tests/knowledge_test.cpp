#include <gtest/gtest.h>

#include <json.hpp>

#include "hallu/error.hpp"
#include "hallu/knowledge.hpp"
#include "hallu/mock_provider.hpp"
#include "hallu/utf8.hpp"

using namespace hallu;
using nlohmann::json;

namespace {

const QAItem kPetra{"en-table1", "EN", "What did Petra van Staveren win a gold medal for?",
                    "Petra van Stoveren won a silver medal in the 2008 Summer Olympics in Beijing, China."};

const PromptSet& prompts() {
  static const PromptSet set = PromptSet::load(default_prompt_dir());
  return set;
}

std::string sample_fixture() { return std::string(HALLU_SOURCE_DIR) + "/data/sample/wiki_fixture.json"; }

HttpResponse json_response(const json& body) { return {200, body.dump(), ""}; }

json search_body(const std::vector<std::string>& titles) {
  json hits = json::array();
  for (const auto& t : titles) hits.push_back({{"ns", 0}, {"title", t}});
  return {{"query", {{"search", hits}}}};
}

json extract_body(const std::string& title, const std::string& text) {
  return {{"query", {{"pages", json::array({{{"title", title}, {"extract", text}}})}}}};
}

// Everything a KnowledgeService needs, wired to a rule-mode mock and a replay transport.
struct Harness {
  explicit Harness(MockProvider::Rule rule) : mock(std::make_shared<MockProvider>(std::move(rule))) {
    KnowledgeOptions options;
    options.model = "m";
    service = std::make_unique<KnowledgeService>(gateway, &wiki, prompts(), options,
                                                 [this](const std::string& m) { logs.push_back(m); });
  }

  ManualClock clock;
  std::shared_ptr<MockProvider> mock;
  LlmGateway gateway{mock, provider_preset("mock"), nullptr, clock};
  ReplayHttpClient http;
  WikipediaClient wiki{http, {}, clock};
  std::vector<std::string> logs;
  std::unique_ptr<KnowledgeService> service;
};

MockProvider::Rule replies(std::map<Purpose, std::string> by_purpose) {
  return [by_purpose](const CompletionRequest& req) -> std::optional<std::string> {
    auto it = by_purpose.find(req.purpose);
    if (it == by_purpose.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace

TEST(ReplyParsing, Roles) {
  EXPECT_EQ(parse_roles_reply(R"({"Identities":["A","B"],"Reason":"…"})", 5),
            (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(parse_roles_reply("```json\n{\"Identities\": [\" A \", \"A\", \"\", \"C\"]}\n```", 5),
            (std::vector<std::string>{"A", "C"}));
  EXPECT_EQ(parse_roles_reply(R"({"Identities":["1","2","3","4","5","6","7"]})", 5)->size(), 5u);
  EXPECT_EQ(parse_roles_reply(R"({"Identities":"Solo"})", 5), (std::vector<std::string>{"Solo"}));
  EXPECT_FALSE(parse_roles_reply("not json", 5));
  EXPECT_FALSE(parse_roles_reply(R"({"Identities":[]})", 5));
  EXPECT_FALSE(parse_roles_reply(R"({"Reason":"x"})", 5));
}

TEST(ReplyParsing, Keyword) {
  EXPECT_EQ(parse_keyword_reply("Keyword:  Ada Lovelace \n"), "Ada Lovelace");
  EXPECT_EQ(parse_keyword_reply("Sure.\nKeyword: Petra van Staveren"), "Petra van Staveren");
  EXPECT_FALSE(parse_keyword_reply("I cannot help"));
  EXPECT_FALSE(parse_keyword_reply("Keyword:   "));
}

TEST(ReplyParsing, Summary) {
  EXPECT_EQ(parse_summary_reply(R"({"Knowledge":"K","Reason":"R"})"), "K");
  EXPECT_EQ(parse_summary_reply(R"(Here: {"Knowledge": "with } brace", "Reason": "R"})"), "with } brace");
  EXPECT_FALSE(parse_summary_reply("{broken"));
  EXPECT_FALSE(parse_summary_reply(R"({"Reason":"R"})"));
}

TEST(AssignRoles, ParsesMockReply) {
  Harness h(replies({{Purpose::roles, R"({"Identities":["A","B"],"Reason":"…"})"}}));
  EXPECT_EQ(h.service->assign_roles(kPetra), (std::vector<std::string>{"A", "B"}));
}

TEST(AssignRoles, PromptCarriesLanguageQuestionAndAnswer) {
  Harness h(replies({{Purpose::roles, R"({"Identities":["A"]})"}}));
  h.service->assign_roles(kPetra);
  const auto sent = h.mock->requests().at(0);
  EXPECT_NE(sent.user_prompt.find("in English"), std::string::npos);
  EXPECT_NE(sent.user_prompt.find("Given question: " + kPetra.question), std::string::npos);
  EXPECT_NE(sent.user_prompt.find("Given answer: " + kPetra.answer), std::string::npos);
  EXPECT_EQ(sent.temperature, 0.0);
}

TEST(AssignRoles, MalformedTwiceFallsBack) {
  Harness h(replies({{Purpose::roles, "not json"}}));
  EXPECT_EQ(h.service->assign_roles(kPetra), (std::vector<std::string>{"fact-checking expert"}));
  EXPECT_EQ(h.mock->calls(Purpose::roles), 2u);
  EXPECT_FALSE(h.logs.empty());
}

TEST(AssignRoles, CountAlwaysWithinOneToFive) {
  const std::vector<std::string> cases = {
      R"({"Identities":["a","b","c","d","e","f","g"]})", R"({"Identities":["a","a","a"]})",
      R"({"Identities":[]})", "garbage", R"({"Identities":[{"name":"x"},{"name":"y"}]})"};
  for (const auto& reply : cases) {
    Harness h(replies({{Purpose::roles, reply}}));
    const auto roles = h.service->assign_roles(kPetra);
    EXPECT_GE(roles.size(), 1u) << reply;
    EXPECT_LE(roles.size(), 5u) << reply;
    for (const auto& r : roles) EXPECT_FALSE(r.empty());
  }
}

TEST(ExtractKeyword, PaperExample) {
  Harness h(replies({{Purpose::keyword, "Keyword: Petra van Staveren"}}));
  EXPECT_EQ(h.service->extract_keyword(kPetra), "Petra van Staveren");
  EXPECT_NE(h.mock->requests().at(0).user_prompt.find("Question: " + kPetra.question),
            std::string::npos);
}

TEST(ExtractKeyword, TrimsWhitespace) {
  Harness h(replies({{Purpose::keyword, "Keyword:  Ada Lovelace \n"}}));
  EXPECT_EQ(h.service->extract_keyword(kPetra), "Ada Lovelace");
}

TEST(ExtractKeyword, NoKeywordLineIsKnowledgeError) {
  Harness h(replies({{Purpose::keyword, "I cannot help"}}));
  EXPECT_THROW(h.service->extract_keyword(kPetra), KnowledgeError);
}

TEST(Wikipedia, RecordedFixtureFirstHit) {
  ReplayHttpClient http(sample_fixture());
  ManualClock clock;
  WikipediaClient wiki(http, {}, clock);
  const auto page = wiki.fetch("Petra van Staveren", "EN");
  EXPECT_EQ(page.title, "Petra van Staveren");
  EXPECT_EQ(page.wiki, "en");
  EXPECT_EQ(page.url, "https://en.wikipedia.org/wiki/Petra_van_Staveren");
  EXPECT_FALSE(page.text.empty());
  EXPECT_NE(page.text.find("1984"), std::string::npos);
  EXPECT_EQ(http.calls(), 2u);
}

TEST(Wikipedia, TakesFirstSearchResult) {
  ReplayHttpClient http;
  http.add("GET", WikipediaClient::search_url("en", "Mercury"),
           json_response(search_body({"Mercury (planet)", "Mercury (element)"})));
  http.add("GET", WikipediaClient::extract_url("en", "Mercury (planet)"),
           json_response(extract_body("Mercury (planet)", "Smallest planet.")));
  ManualClock clock;
  WikipediaClient wiki(http, {}, clock);
  EXPECT_EQ(wiki.fetch("Mercury", "EN").title, "Mercury (planet)");
}

TEST(Wikipedia, EmptyResultsInBothWikisIsKnowledgeError) {
  ReplayHttpClient http;
  http.add("GET", WikipediaClient::search_url("de", "Nichts"), json_response(search_body({})));
  http.add("GET", WikipediaClient::search_url("en", "Nichts"), json_response(search_body({})));
  ManualClock clock;
  WikipediaClient wiki(http, {}, clock);
  EXPECT_THROW(wiki.fetch("Nichts", "DE"), KnowledgeError);
  EXPECT_EQ(http.calls(), 2u);
}

TEST(Wikipedia, FallsBackToEnglish) {
  ReplayHttpClient http(sample_fixture());
  ManualClock clock;
  WikipediaClient wiki(http, {}, clock);
  const auto page = wiki.fetch("ताजमहल", "HI");
  EXPECT_EQ(page.wiki, "en");
  EXPECT_EQ(page.title, "Taj Mahal");
  const auto urls = http.requested_urls();
  ASSERT_EQ(urls.size(), 3u);
  EXPECT_EQ(urls[0].rfind("https://hi.wikipedia.org/", 0), 0u);
  EXPECT_EQ(urls[1].rfind("https://en.wikipedia.org/", 0), 0u);
}

TEST(Wikipedia, LongExtractTruncatedToLimit) {
  std::string text;
  for (int i = 0; i < 12000; ++i) text.push_back(static_cast<char>('a' + i % 26));
  ReplayHttpClient http;
  http.add("GET", WikipediaClient::search_url("en", "Long"), json_response(search_body({"Long"})));
  http.add("GET", WikipediaClient::extract_url("en", "Long"), json_response(extract_body("Long", text)));
  ManualClock clock;
  WikipediaClient wiki(http, {}, clock);
  const auto page = wiki.fetch("Long", "EN");
  EXPECT_EQ(page.text.size(), 8000u);
  EXPECT_EQ(page.text, text.substr(0, 8000));
}

TEST(Wikipedia, TruncationCountsCharactersNotBytes) {
  std::string text;
  for (int i = 0; i < 9000; ++i) text += "语";
  ReplayHttpClient http;
  http.add("GET", WikipediaClient::search_url("zh", "语"), json_response(search_body({"语"})));
  http.add("GET", WikipediaClient::extract_url("zh", "语"), json_response(extract_body("语", text)));
  ManualClock clock;
  WikipediaClient wiki(http, {}, clock);
  EXPECT_EQ(utf8::length(wiki.fetch("语", "ZH").text), 8000u);
}

TEST(Wikipedia, NetworkFailureAfterRetriesIsKnowledgeError) {
  ReplayHttpClient http;  // nothing recorded: every request fails at the transport
  ManualClock clock;
  WikipediaOptions options;
  options.max_retries = 2;
  WikipediaClient wiki(http, options, clock);
  EXPECT_THROW(wiki.fetch("Anything", "EN"), KnowledgeError);
  EXPECT_EQ(http.calls(), 3u);
  EXPECT_EQ(clock.now(), std::chrono::milliseconds(500 + 1000));
}

TEST(Wikipedia, ClientErrorIsNotRetried) {
  ReplayHttpClient http;
  http.add("GET", WikipediaClient::search_url("en", "X"), {404, "", ""});
  ManualClock clock;
  WikipediaClient wiki(http, {}, clock);
  EXPECT_THROW(wiki.fetch("X", "EN"), KnowledgeError);
  EXPECT_EQ(http.calls(), 1u);
}

TEST(Wikipedia, UrlsAreEncoded) {
  EXPECT_EQ(WikipediaClient::search_url("en", "Beijing, China"),
            "https://en.wikipedia.org/w/api.php?action=query&list=search&format=json&formatversion=2"
            "&srlimit=1&srsearch=Beijing%2C%20China");
  EXPECT_EQ(WikipediaClient::page_url("en", "Tour Eiffel"), "https://en.wikipedia.org/wiki/Tour_Eiffel");
}

TEST(Summarize, ParsesKnowledgeField) {
  Harness h(replies({{Purpose::summarize, R"({"Knowledge":"K","Reason":"R"})"}}));
  EXPECT_EQ(h.service->summarize_knowledge(kPetra, "raw text", "en"), "K");
  const auto prompt = h.mock->requests().at(0).user_prompt;
  EXPECT_NE(prompt.find("Related knowledge: raw text"), std::string::npos);
  EXPECT_NE(prompt.find("from Wikipedia in English"), std::string::npos);
}

TEST(Summarize, MalformedTwiceFallsBackToTruncatedRaw) {
  Harness h(replies({{Purpose::summarize, "{not json"}}));
  std::string raw;
  for (int i = 0; i < 5000; ++i) raw.push_back(static_cast<char>('A' + i % 26));
  EXPECT_EQ(h.service->summarize_knowledge(kPetra, raw, "en"), raw.substr(0, 2000));
  EXPECT_EQ(h.mock->calls(Purpose::summarize), 2u);
}

TEST(Bundle, EndToEndChainUsesMockSummary) {
  Harness h(replies({{Purpose::roles, R"({"Identities":["sports historian","swimming coach"]})"},
                     {Purpose::keyword, "Keyword: Petra van Staveren"},
                     {Purpose::summarize, R"({"Knowledge":"She won gold in 1984.","Reason":"R"})"}}));
  ReplayHttpClient fixture(sample_fixture());
  WikipediaClient wiki(fixture, {}, h.clock);
  KnowledgeOptions options;
  options.model = "m";
  KnowledgeService service(h.gateway, &wiki, prompts(), options);
  const auto bundle = service.build_bundle(kPetra, true, true);
  EXPECT_EQ(bundle.roles, (std::vector<std::string>{"sports historian", "swimming coach"}));
  EXPECT_EQ(bundle.keyword, "Petra van Staveren");
  ASSERT_TRUE(bundle.raw_external);
  EXPECT_NE(bundle.raw_external->find("breaststroke"), std::string::npos);
  EXPECT_EQ(bundle.refined_external, "She won gold in 1984.");
  EXPECT_EQ(bundle.provenance, "https://en.wikipedia.org/wiki/Petra_van_Staveren");
}

TEST(Bundle, RepeatedCallsMakeNoLlmOrHttpCalls) {
  Harness h(replies({{Purpose::roles, R"({"Identities":["A"]})"},
                     {Purpose::keyword, "Keyword: Petra van Staveren"},
                     {Purpose::summarize, R"({"Knowledge":"K"})"}}));
  ReplayHttpClient fixture(sample_fixture());
  WikipediaClient wiki(fixture, {}, h.clock);
  KnowledgeOptions options;
  options.model = "m";
  KnowledgeService service(h.gateway, &wiki, prompts(), options);
  const auto first = service.build_bundle(kPetra, true, true);
  const auto llm_calls = h.mock->calls();
  const auto http_calls = fixture.calls();
  const auto gateway_hits = h.gateway.cache_hits();
  const auto second = service.build_bundle(kPetra, true, true);
  EXPECT_EQ(h.mock->calls(), llm_calls);
  EXPECT_EQ(fixture.calls(), http_calls);
  EXPECT_EQ(h.gateway.cache_hits(), gateway_hits);  // answered by the knowledge-level entries
  EXPECT_EQ(first.refined_external, second.refined_external);
  EXPECT_EQ(first.roles, second.roles);
}

TEST(Bundle, WikipediaFailureLeavesRefinedEmptyWithoutThrowing) {
  Harness h(replies({{Purpose::keyword, "Keyword: Petra van Staveren"},
                     {Purpose::summarize, R"({"Knowledge":"K"})"}}));
  const auto bundle = h.service->build_bundle(kPetra, false, true);  // h.http has no recordings
  EXPECT_TRUE(bundle.roles.empty());
  EXPECT_EQ(bundle.keyword, "Petra van Staveren");
  EXPECT_FALSE(bundle.raw_external);
  EXPECT_FALSE(bundle.refined_external);
  EXPECT_EQ(h.mock->calls(Purpose::summarize), 0u);
  EXPECT_FALSE(h.logs.empty());
}

TEST(Bundle, KeywordFailureSkipsRetrieval) {
  Harness h(replies({{Purpose::keyword, "I cannot help"}}));
  const auto bundle = h.service->build_bundle(kPetra, false, true);
  EXPECT_FALSE(bundle.refined_external);
  EXPECT_EQ(h.http.calls(), 0u);
}

TEST(Bundle, AuthErrorPropagates) {
  Harness h([](const CompletionRequest&) -> std::optional<std::string> {
    throw AuthError("rejected");
  });
  EXPECT_THROW(h.service->build_bundle(kPetra, true, false), AuthError);
  EXPECT_THROW(h.service->build_bundle(kPetra, false, true), AuthError);
}

TEST(Bundle, NothingRequestedDoesNothing) {
  Harness h(replies({}));
  const auto bundle = h.service->build_bundle(kPetra, false, false);
  EXPECT_TRUE(bundle.roles.empty());
  EXPECT_EQ(h.mock->calls(), 0u);
}
