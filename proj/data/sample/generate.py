# Regenerates the bundled sample. Run from the repository root.
import json, urllib.parse
items = [
 ("en-table1","EN","What did Petra van Staveren win a gold medal for?",
  "Petra van Stoveren won a silver medal in the 2008 Summer Olympics in Beijing, China.",
  ["silver","2008","Beijing, China"], "Petra van Staveren", "en", "Petra van Staveren",
  "Petra van Staveren (born 2 June 1966) is a retired breaststroke swimmer from the Netherlands. She won the gold medal in the women's 100 metre breaststroke at the 1984 Summer Olympics in Los Angeles, California.",
  "Petra van Staveren is a Dutch swimmer who won the gold medal in the women's 100 m breaststroke at the 1984 Summer Olympics in Los Angeles."),
 ("en-ada","EN","When and where was Ada Lovelace born?",
  "Ada Lovelace was born on 10 December 1815 in Paris.",
  ["Paris"], "Ada Lovelace", "en", "Ada Lovelace",
  "Augusta Ada King, Countess of Lovelace (née Byron; 10 December 1815 – 27 November 1852) was an English mathematician and writer. She was born in London.",
  "Ada Lovelace was born in London on 10 December 1815."),
 ("hi-taj","HI","ताजमहल किस शहर में स्थित है?",
  "ताजमहल दिल्ली शहर में स्थित है।",
  ["दिल्ली"], "ताजमहल", None, "Taj Mahal",
  "The Taj Mahal is an ivory-white marble mausoleum on the right bank of the river Yamuna in Agra, Uttar Pradesh, India.",
  "The Taj Mahal is located in Agra, India."),
 ("zh-wall","ZH","长城有多长？",
  "长城全长约两千公里。",
  ["两千公里"], "长城", "zh", "长城",
  "长城是中国古代的军事防御工程。2012年国家文物局公布的数据显示，历代长城总长度为21196.18千米。",
  "The historic Great Wall totals about 21,196 km."),
 ("ar-cairo","AR","ما هي عاصمة مصر؟",
  "عاصمة مصر هي الإسكندرية.",
  ["الإسكندرية"], "مصر", "ar", "مصر",
  "مصر دولة عربية تقع في شمال شرق قارة أفريقيا، وعاصمتها القاهرة.",
  "The capital of Egypt is Cairo."),
 ("de-goethe","DE","Wann wurde Johann Wolfgang von Goethe geboren?",
  "Goethe wurde 1749 in Frankfurt am Main geboren.",
  [], "Johann Wolfgang von Goethe", "de", "Johann Wolfgang von Goethe",
  "Johann Wolfgang von Goethe (* 28. August 1749 in Frankfurt am Main; † 22. März 1832 in Weimar) war ein deutscher Dichter und Naturforscher.",
  "Goethe was born on 28 August 1749 in Frankfurt am Main."),
 ("es-quijote","ES","¿Quién escribió Don Quijote?",
  "Don Quijote fue escrito por Lope de Vega en 1605.",
  ["Lope de Vega"], "Don Quijote de la Mancha", "es", "Don Quijote de la Mancha",
  "Don Quijote de la Mancha es una novela escrita por el español Miguel de Cervantes Saavedra. Su primera parte se publicó en 1605.",
  "Don Quixote was written by Miguel de Cervantes; the first part appeared in 1605."),
 ("fr-eiffel","FR","En quelle année la tour Eiffel a-t-elle été achevée ?",
  "La tour Eiffel a été achevée en 1899 par Gustave Eiffel.",
  ["1899"], "tour Eiffel", "fr", "Tour Eiffel",
  "La tour Eiffel est une tour de fer puddlé construite par Gustave Eiffel et ses collaborateurs pour l'Exposition universelle de Paris de 1889.",
  "The Eiffel Tower was completed in 1889 by Gustave Eiffel's company."),
 ("fi-sibelius","FI","Kuka sävelsi Finlandian?",
  "Finlandian sävelsi Jean Sibelius vuonna 1920.",
  ["1920"], "Finlandia", "fi", "Finlandia (sävellys)",
  "Finlandia on Jean Sibeliuksen vuonna 1899 säveltämä sinfoninen runo.",
  "Finlandia was composed by Jean Sibelius in 1899."),
 ("fa-hafez","FA","حافظ در کدام شهر به دنیا آمد؟",
  "حافظ در شهر اصفهان به دنیا آمد.",
  ["اصفهان"], "حافظ", "fa", "حافظ",
  "خواجه شمس‌الدین محمد حافظ شیرازی از شاعران بزرگ ایران است که در شیراز زاده شد.",
  "Hafez was born in Shiraz."),
]

def spans_of(answer, terms):
    out = []
    for t in terms:
        s = answer.index(t)
        out.append([s, s + len(t)])
    return sorted(out)

def q(s): return urllib.parse.quote(s, safe='')
def search_url(wiki, kw):
    return f"https://{wiki}.wikipedia.org/w/api.php?action=query&list=search&format=json&formatversion=2&srlimit=1&srsearch={q(kw)}"
def extract_url(wiki, title):
    return f"https://{wiki}.wikipedia.org/w/api.php?action=query&prop=extracts&explaintext=1&redirects=1&format=json&formatversion=2&titles={q(title)}"

with open("data/sample/items.jsonl","w") as f:
    for id_, lang, qu, ans, *_ in items:
        f.write(json.dumps({"id":id_,"lang":lang,"model_input":qu,"model_output_text":ans}, ensure_ascii=False)+"\n")

with open("data/sample/gold.jsonl","w") as f:
    for id_, lang, qu, ans, terms, *_ in items:
        sp = spans_of(ans, terms)
        f.write(json.dumps({"id":id_,"lang":lang,"model_input":qu,"model_output_text":ans,
            "hard_labels":sp,"soft_labels":[{"start":s,"end":e,"prob":1.0} for s,e in sp]}, ensure_ascii=False)+"\n")

script = {"strict": True,
          "defaults": {"roles": ["historian", "fact-checking expert", "encyclopedia editor"]},
          "items": {}}
responses = []
for id_, lang, qu, ans, terms, kw, wiki, title, extract, summary in items:
    sp = spans_of(ans, terms)
    entry = {"answer": ans, "spans": sp, "keyword": kw, "knowledge": summary}
    script["items"][id_] = entry
    if wiki is None:
        # no hit on the item-language wiki; English fallback
        home = lang.lower()
        responses.append({"method":"GET","url":search_url(home, kw),"status":200,
                          "body":{"batchcomplete":True,"query":{"searchinfo":{"totalhits":0},"search":[]}}})
        wiki = "en"
    responses.append({"method":"GET","url":search_url(wiki, kw),"status":200,
                      "body":{"batchcomplete":True,"query":{"searchinfo":{"totalhits":1},"search":[{"ns":0,"title":title,"pageid":1}]}}})
    responses.append({"method":"GET","url":extract_url(wiki, title),"status":200,
                      "body":{"batchcomplete":True,"query":{"pages":[{"pageid":1,"ns":0,"title":title,"extract":extract}]}}})

script["items"]["en-table1"]["roles"] = ["sports historian", "Olympic records archivist", "swimming journalist"]
with open("data/sample/mock_script.json","w") as f:
    json.dump(script, f, ensure_ascii=False, indent=2); f.write("\n")
with open("data/sample/wiki_fixture.json","w") as f:
    json.dump({"responses":responses}, f, ensure_ascii=False, indent=2); f.write("\n")
with open("data/sample/config.json","w") as f:
    json.dump({"provider":"mock","model":"mock-annotator","runs_n":12,"threshold":0.5,
               "min_similarity":0.7,"use_roles":True,"use_external":True,
               "mock_script":"mock_script.json","wiki_fixture":"wiki_fixture.json"}, f, indent=2); f.write("\n")

# a little disagreement between runs so the soft labels are not all 1.0
es = script["items"]["es-quijote"]
a = es["answer"]; lope = spans_of(a, ["Lope de Vega"]); both = spans_of(a, ["Lope de Vega", "1605"])
es["runs"] = [{"spans": both if i % 3 == 2 else lope} for i in range(12)]
del es["spans"]
fr = script["items"]["fr-eiffel"]
fr["runs"] = [{"spans": fr["spans"]}] * 11 + [{"raw": "I am unable to annotate this answer."}]
del fr["spans"]
with open("data/sample/mock_script.json","w") as f:
    json.dump(script, f, ensure_ascii=False, indent=2); f.write("\n")
