#!/usr/bin/env python3
"""Writes the Van Gogh fixture corpus and the scripted LLM replies for it.

Outputs (in data/fixture/ unless --out is given):
  corpus.jsonl        biography segments
  augment_stub.json   queue-mode replies for `episodic augment` on corpus.jsonl
  eval_stub.json      queue-mode replies for `episodic eval` on queries.txt
  queries.txt         evaluation queries
  persona.json        persona profile

The queue replays replies in the order the pipeline asks:
  1. one script-writer call per segment, by ordinal
  2. one expert-analyst call per scene, in scene order
  3. one emotion-rater call per batch of 32 sorted labels
  4. one date-normalizer call per scene whose date_text is not blank
  5. one location-normalizer call per scene whose location_text is not blank
A malformed reply costs one extra entry: the bad reply, then the re-asked one.
"""

import argparse
import json
import pathlib

LEXICON = {
    "anguish": (-0.9, 0.7),
    "anxiety": (-0.6, 0.7),
    "awe": (0.6, 0.6),
    "bitterness": (-0.6, 0.3),
    "calm": (0.5, -0.6),
    "confusion": (-0.3, 0.3),
    "contentment": (0.7, -0.3),
    "curiosity": (0.5, 0.4),
    "defiance": (-0.1, 0.6),
    "despair": (-0.9, -0.2),
    "determination": (0.4, 0.6),
    "devotion": (0.6, 0.2),
    "disappointment": (-0.6, -0.2),
    "embarrassment": (-0.5, 0.4),
    "excitement": (0.7, 0.8),
    "exhaustion": (-0.4, -0.7),
    "fear": (-0.7, 0.8),
    "frustration": (-0.6, 0.5),
    "gratitude": (0.8, 0.1),
    "grief": (-0.8, -0.4),
    "guilt": (-0.6, 0.2),
    "hope": (0.6, 0.3),
    "humiliation": (-0.7, 0.4),
    "inspiration": (0.8, 0.6),
    "isolation": (-0.6, -0.4),
    "joy": (0.9, 0.6),
    "loneliness": (-0.6, -0.4),
    "love": (0.8, 0.4),
    "melancholy": (-0.5, -0.5),
    "nostalgia": (0.2, -0.3),
    "pride": (0.7, 0.5),
    "rage": (-0.8, 0.9),
    "rejection": (-0.7, 0.3),
    "relief": (0.6, -0.4),
    "serenity": (0.7, -0.6),
    "shame": (-0.7, 0.3),
    "tenderness": (0.7, -0.1),
    "wonder": (0.7, 0.5),
}

# (id, source_text, scenes); each scene is
# (background, narrator, voiceover, characters, emotions, location_text, place,
#  date_text, iso_date, context_summary, relevance, commentary)
SEGMENTS = [
    ("birth-zundert",
     "Vincent Willem van Gogh was born on 30 March 1853 in Zundert, a village in the Dutch province of North Brabant, "
     "the eldest surviving son of the pastor Theodorus van Gogh and Anna Carbentus. A stillborn brother born a year "
     "earlier had carried the same name.",
     [("A parsonage in a Brabant village, spring.",
       "In the quiet village of Zundert, a pastor's son is born into a name already carved on a small gravestone.",
       "I grew up walking past a grave that bore my own name. The heath, the pines, the wet fields of Brabant were my "
       "first teachers, and I think I learned to look at things long before I learned to speak of them.",
       ["Vincent", "Theodorus van Gogh", "Anna Carbentus"], ["wonder", "melancholy"],
       "the parsonage in Zundert, North Brabant", "Zundert, Netherlands", "30 March 1853", "1853-03-30",
       "Vincent is born in Zundert as the eldest surviving child of a Protestant pastor; a stillborn brother had "
       "been given the same name a year before.", 0.55,
       "The shared name with a dead brother is often cited in accounts of his sense of displacement.")]),
    ("goupil-the-hague",
     "In July 1869, aged sixteen, Vincent joined the art dealers Goupil & Cie in The Hague through his uncle. He "
     "handled reproductions of paintings and was considered a diligent employee.",
     [("The showroom of an art dealer in The Hague.",
       "Young Vincent begins his working life among prints and canvases in a respectable gallery.",
       "I spent my days among engravings and photographs of paintings. I loved the Dutch masters, the Millets, the "
       "quiet interiors. I was proud to be trusted with the work, and I wrote to Theo about every picture I admired.",
       ["Vincent", "Uncle Cent", "Theo"], ["pride", "curiosity"],
       "the Goupil gallery in The Hague", "The Hague, Netherlands", "July 1869", "1869-07",
       "Vincent starts as a junior clerk at Goupil & Cie in The Hague, arranged by his uncle Cent.", 0.5,
       "His years as an art dealer gave him a broad visual education long before he painted.")]),
    ("london-loyer",
     "Transferred to Goupil's London branch in 1873, Vincent lodged with Ursula Loyer and her daughter Eugenie. "
     "His feelings for Eugenie were not returned, and he grew withdrawn and increasingly religious.",
     [("A lodging house in south London.",
       "In London, Vincent's first love meets a gentle but firm refusal.",
       "I thought Eugenie's kindness meant more than it did. When she told me she was already engaged I walked the "
       "city for hours. After that I read the Bible at night and found less and less to say to anyone at the gallery.",
       ["Vincent", "Eugenie Loyer", "Ursula Loyer"], ["rejection", "loneliness", "love"],
       "Brixton, London", "London, United Kingdom", "1874", "1874",
       "Vincent's affection for his landlady's daughter is rejected, and he turns inward and towards religion.",
       0.6, "Biographers treat the London rejection as the start of his religious fervour.")]),
    ("paris-goupil-dismissal",
     "Moved to the Paris head office, Vincent quarrelled with customers over taste and left without permission "
     "to spend Christmas in Etten. He was dismissed from Goupil at the start of April 1876.",
     [("The Paris head office of Goupil & Cie.",
       "Seven years of service end with a dismissal in Paris.",
       "I could no longer pretend that fashionable pictures were good. I told customers what I thought and went home "
       "for Christmas without asking. When they let me go I felt shame, but also a strange relief.",
       ["Vincent", "Leon Boussod"], ["shame", "relief"],
       "Goupil's head office, Paris", "Paris, France", "April 1876", "1876-04",
       "Vincent is dismissed from the art dealership after conflicts with clients and an unauthorised absence.",
       0.5, "The dismissal closed his career in commerce.")]),
    ("ramsgate-teacher",
     "In April 1876 Vincent took an unpaid post as a teacher in a small boarding school in Ramsgate, on the Kent "
     "coast, in exchange for board and lodging.",
     [("A boarding school by the sea in Kent.",
       "Vincent teaches poor boys by the sea for no wages.",
       "From the school window the boys and I watched the sea and the harbour. I had no money, only bread and a "
       "roof, yet I felt close to something when I walked along the cliffs in the evening.",
       ["Vincent", "William Stokes", "pupils"], ["calm", "hope"],
       "a boarding school in Ramsgate", "Ramsgate, United Kingdom", "April 1876", "1876-04",
       "Vincent works as an unpaid assistant teacher at William Stokes's school in Ramsgate.", 0.3,
       "A brief, modest post that fed his wish to serve the poor.")]),
    ("isleworth-sermon",
     "Following the school to Isleworth, Vincent assisted the Methodist minister Thomas Slade-Jones and in "
     "November 1876 gave his first sermon in the church at Richmond.",
     [("A Methodist chapel outside London, late autumn.",
       "Vincent climbs a pulpit for the first time.",
       "My hands shook when I began, and I spoke of a pilgrim's progress through life towards a city of light. "
       "Afterwards I felt I had found my calling, to bring the word to people who labour.",
       ["Vincent", "Thomas Slade-Jones"], ["excitement", "devotion"],
       "Isleworth, near London", "Isleworth, United Kingdom", "November 1876", "1876-11",
       "Vincent preaches his first sermon while assisting a Methodist minister near London.", 0.45,
       "The sermon survives in a letter and shows the pilgrim imagery of his later writing.")]),
    ("dordrecht-bookshop",
     "Early in 1877 Vincent worked as a clerk in a bookshop in Dordrecht, where he spent his time translating the "
     "Bible into several languages and sketching in the margins.",
     [("A bookshop in a Dutch river town.",
       "Behind a bookshop counter, Vincent's thoughts are elsewhere.",
       "I sold books I did not care for and translated Scripture into French, German and English late at night. "
       "My room-mate thought me odd. I was only waiting for the door to my real work to open.",
       ["Vincent", "Pieter Braat"], ["frustration", "devotion"],
       "a bookshop in Dordrecht", "Dordrecht, Netherlands", "early 1877", "1877",
       "Vincent clerks in a Dordrecht bookshop while preparing himself for a religious vocation.", 0.25,
       "A short interlude of little consequence except for his deepening piety.")]),
    ("amsterdam-theology",
     "From May 1877 Vincent lived with his uncle Jan in Amsterdam to prepare for the university entrance exam in "
     "theology. He struggled with Latin and Greek and abandoned the effort in 1878.",
     [("A naval officer's house in Amsterdam.",
       "Vincent tries to become a scholar and fails.",
       "Latin and Greek would not enter my head. I beat myself with a cudgel when I felt I had been lazy. In the end "
       "I told my tutor that Greek verbs were not needed to comfort a miner.",
       ["Vincent", "Uncle Jan", "Mendes da Costa"], ["frustration", "shame", "determination"],
       "Amsterdam", "Amsterdam, Netherlands", "May 1877", "1877-05",
       "Vincent studies for the theology entrance exam in Amsterdam but gives up after a year.", 0.4,
       "His tutor Mendes da Costa later recalled his self-punishment and warmth.")]),
    ("borinage-preacher",
     "In 1879 Vincent worked as a lay preacher among coal miners in Wasmes in the Borinage, Belgium. He gave away "
     "his clothes and slept on straw, and the church authorities dismissed him for undermining the dignity of the "
     "priesthood.",
     [("A coal-mining village in southern Belgium.",
       "Vincent lives as poorly as the miners he preaches to.",
       "I went down the mine at Marcasse, seven hundred metres into the dark, and came up black as the men. I gave "
       "my bed to the sick and slept on straw. The committee said I had no dignity. I thought I had finally found "
       "some.",
       ["Vincent", "miners", "evangelical committee"], ["devotion", "humiliation", "exhaustion"],
       "the mining village of Wasmes in the Borinage", "Wasmes, Belgium", "1879", "1879",
       "Vincent preaches to miners in the Borinage, lives in extreme poverty and is dismissed by the church.",
       0.7, "The Borinage years turned his compassion for labourers into the subject of his art.")]),
    ("cuesmes-decision",
     "After his dismissal Vincent stayed in Cuesmes, drawing miners and copying Millet. In the summer of 1880 he "
     "wrote to his brother Theo that he had decided to become an artist.",
     [("A miner's cottage in Cuesmes.",
       "In poverty and silence, Vincent picks up the pencil for good.",
       "I said to myself, I will take up my pencil and draw again, and from that moment everything changed for me. "
       "Theo sent money, and I copied Millet's sowers until my fingers ached.",
       ["Vincent", "Theo"], ["determination", "hope", "gratitude"],
       "Cuesmes", "Cuesmes, Belgium", "August 1880", "1880-08",
       "Vincent resolves to become an artist, supported financially by his brother Theo.", 0.85,
       "This decision marks the true beginning of his artistic career.")]),
    ("brussels-academy",
     "In October 1880 Vincent moved to Brussels to study anatomy and perspective, attending the academy briefly "
     "and befriending the painter Anthon van Rappard.",
     [("A rented room in Brussels.",
       "Vincent takes lessons in perspective and finds a friend.",
       "I worked from anatomy books and skeletons, and Rappard let me use his studio. For the first time I talked "
       "about drawing with someone who drew.",
       ["Vincent", "Anthon van Rappard"], ["curiosity", "determination"],
       "Brussels", "Brussels, Belgium", "October 1880", "1880-10",
       "Vincent studies drawing in Brussels and begins a friendship with Anthon van Rappard.", 0.35,
       "Rappard's letters with Vincent are a key source for these years.")]),
    ("etten-kee",
     "In the summer of 1881, at his parents' home in Etten, Vincent fell in love with his widowed cousin Kee Vos. "
     "She answered his proposal with 'no, never, never'. He quarrelled with his father and left at Christmas.",
     [("A parsonage in Etten.",
       "A proposal is refused and a family quarrel follows.",
       "She said no, never, never. I went to Amsterdam and held my hand in the lamp flame, asking to see her for as "
       "long as I could bear it. They blew out the lamp. At Christmas my father and I argued and I left the house.",
       ["Vincent", "Kee Vos", "Theodorus van Gogh"], ["rejection", "anguish", "rage"],
       "the parsonage at Etten", "Etten-Leur, Netherlands", "summer 1881", "1881",
       "Vincent's proposal to his cousin Kee Vos is firmly rejected, leading to a rupture with his father.", 0.6,
       "The lamp episode shows the intensity of his attachments.")]),
    ("hague-sien",
     "In The Hague in 1882 Vincent took lessons from Anton Mauve and lived with Sien Hoornik, a pregnant former "
     "prostitute, and her daughter, drawing them repeatedly. His family and Mauve disapproved.",
     [("A small studio in The Hague.",
       "Vincent makes a household with a woman society has cast out.",
       "Sien posed for me, worn and pregnant, and I drew her as she was. I wanted to save her and thought we might "
       "be a family. Mauve turned away from me, and my father spoke of having me committed.",
       ["Vincent", "Sien Hoornik", "Anton Mauve"], ["tenderness", "defiance", "isolation"],
       "The Hague", "The Hague, Netherlands", "1882", "1882",
       "Vincent lives with Sien Hoornik in The Hague, alienating his mentor Mauve and his family.", 0.6,
       "Drawings such as 'Sorrow' come from this period.")]),
    ("drenthe",
     "In September 1883 Vincent left Sien and went to Drenthe, a remote peat region in the north of the "
     "Netherlands, staying at Hoogeveen and Nieuw-Amsterdam and painting the moors.",
     [("The peat moors of Drenthe, autumn.",
       "Alone on the moors, Vincent paints barges and huts under low skies.",
       "The moor was endless and brown, with peat barges and small huts half sunk into the earth. I was lonely and "
       "short of paint, and the thought of Sien and the child kept coming back.",
       ["Vincent"], ["loneliness", "melancholy"],
       "the peat moors of Drenthe near Hoogeveen", "Hoogeveen, Netherlands", "September 1883", "1883-09",
       "Vincent spends three solitary months painting the Drenthe moors after leaving Sien.", 0.35,
       "The isolation drove him back to his parents after three months.")]),
    ("nuenen-weavers",
     "From December 1883 Vincent lived at his parents' new parsonage in Nuenen, painting weavers at their looms "
     "and peasants in the fields.",
     [("Weavers' cottages in Nuenen.",
       "Vincent studies the weavers at their looms.",
       "The looms were like great black machines in the gloom, and the weaver sat inside like a prisoner. I painted "
       "them again and again, trying to get the oak and the dark right.",
       ["Vincent", "weavers"], ["curiosity", "determination"],
       "Nuenen", "Nuenen, Netherlands", "1884", "1884",
       "In Nuenen Vincent makes dozens of studies of weavers and peasants.", 0.45,
       "The weaver series prepared the ground for The Potato Eaters.")]),
    ("father-death",
     "On 26 March 1885 Vincent's father Theodorus died suddenly of a stroke at the door of the parsonage in "
     "Nuenen. Relations with his sister Anna became so strained that Vincent moved out.",
     [("The parsonage in Nuenen, early spring.",
       "A father dies without reconciliation.",
       "Father fell on the threshold and did not get up. We had quarrelled so often. I painted his pipe and tobacco "
       "pouch beside a vase of honesty, and my sister said I had broken his heart.",
       ["Vincent", "Theodorus van Gogh", "Anna van Gogh"], ["grief", "guilt"],
       "the Nuenen parsonage", "Nuenen, Netherlands", "26 March 1885", "1885-03-26",
       "Vincent's father dies suddenly; family tension forces Vincent to leave the parsonage.", 0.65,
       "The death left their long conflict unresolved.")]),
    ("potato-eaters",
     "In April 1885 Vincent completed The Potato Eaters, a dark painting of a peasant family at supper that he "
     "considered his first real masterpiece. Van Rappard criticised it harshly.",
     [("A peasant cottage lit by a single lamp.",
       "Vincent paints the peasants' supper by lamplight.",
       "I wanted the viewer to feel that these people dug the earth with the very hands they put into the dish. "
       "Rappard mocked it, but I knew I had painted something honest.",
       ["Vincent", "the De Groot family", "Anthon van Rappard"], ["pride", "defiance"],
       "a cottage in Nuenen", "Nuenen, Netherlands", "April 1885", "1885-04",
       "Vincent completes The Potato Eaters and breaks with Van Rappard over its criticism.", 0.75,
       "The painting is the culmination of his Dutch period.")]),
    ("antwerp-academy",
     "In January 1886 Vincent enrolled at the academy in Antwerp, discovered Rubens and Japanese prints, and "
     "lived on bread, coffee and tobacco until his health suffered.",
     [("The Antwerp academy, winter.",
       "Vincent discovers colour in Rubens and Japanese prints.",
       "Rubens showed me flesh made of red and green, and the Japanese prints on the quay were full of flat bright "
       "colour. I ate almost nothing and my teeth broke, but I could not stop looking.",
       ["Vincent"], ["inspiration", "exhaustion"],
       "Antwerp", "Antwerp, Belgium", "January 1886", "1886-01",
       "At the Antwerp academy Vincent discovers Rubens's colour and Japanese prints while neglecting his health.",
       0.45, "The academy found him undisciplined; he left after a few months.")]),
    ("paris-theo",
     "In March 1886 Vincent arrived unannounced in Paris and moved in with Theo in Montmartre, studying briefly at "
     "Cormon's studio.",
     [("Theo's apartment in Montmartre.",
       "Vincent surprises his brother in Paris.",
       "I sent Theo a note from the Louvre asking him to meet me in the Salon Carre. He was not pleased, but he took "
       "me in. Living together we argued, and yet I never had a truer friend.",
       ["Vincent", "Theo", "Fernand Cormon"], ["excitement", "gratitude"],
       "Montmartre, Paris", "Paris, France", "March 1886", "1886-03",
       "Vincent joins Theo in Paris and studies at Cormon's studio.", 0.6,
       "Paris exposed him to Impressionism and brightened his palette.")]),
    ("paris-impressionists",
     "During 1887 in Paris Vincent met Toulouse-Lautrec, Emile Bernard, Pissarro, Signac and Gauguin, adopted a "
     "brighter palette and experimented with pointillist touches.",
     [("Cafes and studios of Montmartre.",
       "Vincent learns the new painting among the Paris avant-garde.",
       "Bernard and I painted together at Asnieres, Signac showed me his dots of pure colour, and I hung Japanese "
       "prints at the Tambourin. My pictures began to sing in blue and orange.",
       ["Vincent", "Emile Bernard", "Toulouse-Lautrec", "Paul Signac"], ["joy", "inspiration"],
       "Montmartre, Paris", "Paris, France", "1887", "1887",
       "Vincent meets the Paris avant-garde and transforms his palette.", 0.55,
       "His Paris work shows rapid absorption of Impressionist and Neo-Impressionist ideas.")]),
    ("arrival-arles",
     "On 20 February 1888 Vincent arrived in Arles in Provence, hoping for southern light, and found the town "
     "under snow.",
     [("Arles under snow, late winter.",
       "Vincent steps off the train into the south he dreamed of.",
       "I came for the sun and found snow on the ground, but the sky was clear and the almond trees were about to "
       "blossom. I felt I had come to Japan.",
       ["Vincent"], ["hope", "wonder"],
       "Arles in Provence", "Arles, France", "20 February 1888", "1888-02-20",
       "Vincent leaves Paris for Arles in search of light and colour.", 0.7,
       "The Arles period was his most productive.")]),
    ("yellow-house",
     "In May 1888 Vincent rented four rooms in the Yellow House on Place Lamartine in Arles and planned a "
     "Studio of the South where artists would live and work together.",
     [("The Yellow House on Place Lamartine.",
       "Vincent rents a house and dreams of a brotherhood of painters.",
       "I painted the house yellow in my mind before I ever painted it on canvas. I bought twelve chairs and "
       "imagined the room full of painters working side by side.",
       ["Vincent"], ["hope", "excitement"],
       "the Yellow House, Place Lamartine, Arles", "Arles, France", "May 1888", "1888-05",
       "Vincent rents the Yellow House and plans an artists' colony in Arles.", 0.7,
       "The Studio of the South idea led directly to Gauguin's visit.")]),
    ("saintes-maries",
     "In early June 1888 Vincent spent several days in Saintes-Maries-de-la-Mer on the Mediterranean, painting "
     "fishing boats on the beach.",
     [("A fishing village on the Mediterranean.",
       "Vincent sees the Mediterranean for the first time.",
       "The sea had colours like a mackerel, changing all the time. I drew the boats on the beach at dawn before the "
       "fishermen took them out.",
       ["Vincent", "fishermen"], ["joy", "serenity"],
       "the beach at Saintes-Maries-de-la-Mer", "Saintes-Maries-de-la-Mer, France", "June 1888", "1888-06",
       "Vincent visits the coast and paints fishing boats on the beach.", 0.4,
       "The boat pictures show his mature use of pure colour.")]),
    ("sunflowers",
     "In August 1888, awaiting Gauguin, Vincent painted a series of sunflowers in a vase to decorate the guest "
     "room of the Yellow House.",
     [("The Yellow House studio, high summer.",
       "Vincent paints sunflowers for a friend's room.",
       "I painted with the haste of someone eating bouillabaisse, because the flowers wilt so quickly. Yellow on "
       "yellow, for Gauguin's room, so that he would feel welcome.",
       ["Vincent"], ["joy", "excitement", "hope"],
       "the Yellow House, Arles", "Arles, France", "August 1888", "1888-08",
       "Vincent paints his sunflower series to decorate the Yellow House for Gauguin.", 0.8,
       "The sunflowers became his best-known works.")]),
    ("gauguin-arrival",
     "Paul Gauguin arrived in Arles on 23 October 1888. For two months the two painters lived and worked together, "
     "but their arguments about art grew increasingly heated.",
     [("The Yellow House, autumn evenings.",
       "Two painters share a house and argue late into the night.",
       "Gauguin arrived at dawn and I was so happy. We painted the same subjects side by side. But our discussions "
       "were electric; we came out of them with our heads as tired as a battery after discharge.",
       ["Vincent", "Paul Gauguin"], ["joy", "anxiety", "frustration"],
       "the Yellow House, Arles", "Arles, France", "23 October 1888", "1888-10-23",
       "Gauguin joins Vincent in Arles; their collaboration is productive but tense.", 0.8,
       "The friendship's collapse preceded the crisis of December 1888.")]),
    ("ear-incident",
     "On the evening of 23 December 1888, after a violent quarrel with Gauguin, Vincent cut off part of his left "
     "ear with a razor. He wrapped the severed ear in paper and took it to a brothel, asking that it be given to a "
     "woman there. Gauguin left Arles the next day; Vincent was found unconscious and taken to hospital.",
     [("The Yellow House and a brothel in Arles, a winter night.",
       "After a quarrel with Gauguin, Vincent turns a razor on himself.",
       "You ask why I cut my ear. Gauguin walked out and I knew he would leave me, and everything went dark in my "
       "head. I took the razor and I cut my ear, the left ear. Why did I cut it? You want a reason; it was anguish "
       "with nowhere to go. I wrapped the cut ear in paper and carried it through the night to the brothel, to "
       "Rachel, and then I went home and lay down in the blood.",
       ["Vincent", "Paul Gauguin", "Rachel"], ["anguish", "despair", "fear"],
       "the Yellow House, Arles", "Arles, France", "23 December 1888", "1888-12-23",
       "After a quarrel with Gauguin, Vincent cut off his left ear with a razor and took the cut ear to a brothel. "
       "Gauguin left Arles and Vincent was taken to hospital.", 0.95,
       "The ear incident is the most notorious episode of his life and the first of his severe crises.")]),
    ("hospital-arles",
     "In January 1889 Vincent was treated at the hospital in Arles by Dr Felix Rey. He returned to the Yellow "
     "House but further attacks and a petition by neighbours led to his confinement again.",
     [("The Hotel-Dieu hospital in Arles, winter.",
       "Vincent recovers under the care of a young doctor.",
       "Dr Rey was kind to me and I painted his portrait, which his mother used to mend a chicken coop. When I went "
       "home the neighbours signed a paper calling me a danger, and the police closed my house.",
       ["Vincent", "Dr Felix Rey", "Joseph Roulin"], ["shame", "gratitude", "isolation"],
       "the hospital in Arles", "Arles, France", "January 1889", "1889-01",
       "Vincent recovers in hospital, but neighbours' petition leads to his renewed confinement.", 0.6,
       "The petition ended his hope of living freely in Arles.")]),
    ("saint-remy-asylum",
     "On 8 May 1889 Vincent voluntarily entered the asylum of Saint-Paul-de-Mausole near Saint-Remy-de-Provence. "
     "There, in June 1889, he painted The Starry Night from the view of his barred east window.",
     [("The asylum of Saint-Paul-de-Mausole.",
       "Vincent commits himself to an asylum.",
       "I asked to go. I could not trust myself anymore. They gave me a second room to paint in, and I worked in "
       "the garden among the irises, and the work calmed me.",
       ["Vincent", "Dr Theophile Peyron"], ["relief", "calm"],
       "the asylum at Saint-Remy", "Saint-Remy-de-Provence, France", "8 May 1889", "1889-05-08",
       "Vincent voluntarily enters the asylum at Saint-Remy.", 0.7,
       "He painted around 150 canvases during his year at the asylum."),
      ("The view from an asylum window at night.",
       "From behind bars, Vincent paints the night sky.",
       "Before sunrise I watched the countryside from my window, with nothing but the morning star, which looked "
       "very big. The cypress rose like a flame and the sky turned and turned.",
       ["Vincent"], ["awe", "serenity"],
       "the asylum at Saint-Remy", "Saint-Remy-de-Provence, France", "June 1889", "1889-06",
       "Vincent paints The Starry Night from the view of his asylum window.", 0.85,
       "The Starry Night is now one of the most recognised paintings in the world.")]),
    ("letters-theo",
     "Throughout his adult life Vincent wrote hundreds of letters to his brother Theo, describing his work, his "
     "reading and his struggles.",
     [("A writing table covered with letters.",
       "Vincent writes again to the brother who sustains him.",
       "My dear Theo, I write to my brother because he is the only one who understands what I am trying to do. "
       "Without his money and his letters I would have given up long ago.",
       ["Vincent", "Theo"], ["gratitude", "love"],
       "", "", "", "",
       "Vincent's correspondence with Theo documents his life and thought.", 0.65,
       "The letters are the main source for his biography.")]),
    ("childhood-memory",
     "Vincent later remembered his childhood as a time of long solitary walks on the heath, collecting beetles "
     "and birds' nests.",
     [("The heath around a Brabant village.",
       "Vincent remembers the fields of his boyhood.",
       "When I think of childhood I smell the heath and hear the larks. I collected beetles and knew every nest in "
       "the hedges.",
       ["Vincent"], ["nostalgia", "contentment"],
       "the heath near his childhood home", "unknown", "the winter of his youth", "unknown",
       "Vincent recalls his solitary childhood walks in nature.", 0.3,
       "His childhood love of nature is echoed in his later landscapes.")]),
    ("auvers-arrival",
     "On 20 May 1890 Vincent moved to Auvers-sur-Oise near Paris, under the care of Dr Paul Gachet, and painted "
     "at an extraordinary pace, about one canvas a day.",
     [("A village on the Oise, early summer.",
       "Vincent settles in Auvers and paints almost daily.",
       "Auvers is very beautiful, with old thatched roofs. Dr Gachet seems sicker than I am, but he loves painting. "
       "I paint every day, wheat fields under troubled skies.",
       ["Vincent", "Dr Paul Gachet"], ["hope", "anxiety"],
       "Auvers-sur-Oise", "Auvers-sur-Oise, France", "20 May 1890", "1890-05-20",
       "Vincent moves to Auvers under Dr Gachet's care and paints prolifically.", 0.7,
       "He produced about seventy paintings in seventy days.")]),
    ("death-auvers",
     "On 27 July 1890 Vincent was wounded by a gunshot to the chest in the fields near Auvers. He died two days "
     "later, on 29 July 1890, with Theo at his side.",
     [("A small room at the Auberge Ravoux.",
       "Vincent dies with his brother beside him.",
       "Theo came and sat by the bed, and we spoke in Dutch as when we were boys. The sadness will last forever.",
       ["Vincent", "Theo", "Dr Paul Gachet"], ["grief", "tenderness", "exhaustion"],
       "the Auberge Ravoux in Auvers-sur-Oise", "Auvers-sur-Oise, France", "29 July 1890", "1890-07-29",
       "Vincent dies of a gunshot wound in Auvers, with Theo at his bedside.", 0.9,
       "His death at 37 came just as critics had begun to notice his work.")]),
]

# Replies that test parser tolerance: the script-writer reply for this segment
# is wrapped in prose and a code fence; the analyst reply for this scene
# first comes back without a relevance score and is re-asked.
FENCED_SCRIPT = "paris-theo"
REASKED_ANALYSIS = "drenthe"
# The second label batch first omits one label and is re-asked.
REASK_LABEL_BATCH = 1

BATCH = 32

EVAL_QUERIES = ["Why did you cut your ear?"]
EVAL_REPLIES = [
    "I was in great distress that winter. Something in me broke and I did a terrible thing to myself.",
    "That night the quarrel with Gauguin left me beside myself, and I cut off part of my ear with a razor.",
    "Gauguin had walked out and I knew he would leave. I cut my ear, wrapped it in paper and carried it to the "
    "brothel for Rachel.",
    "It was anguish with nowhere to go. Gauguin was leaving me, the Studio of the South was ending, and I cut my "
    "ear and brought it, washed and wrapped, to Rachel at the brothel.",
]

PERSONA = {
    "name": "Vincent van Gogh",
    "character_description": "A Dutch painter (1853-1890). You speak in the first person about your own life, "
                             "your work, your brother Theo and the people you knew, with warmth and intensity.",
    "task_instructions": "Answer the interviewer in character. When retrieved scenes are given, ground your answer "
                         "in them and do not contradict them. Keep answers under 200 words.",
    "context_budget": 4096,
}


def dumps(value):
    return json.dumps(value, ensure_ascii=False)


def scene_ids(segment_id, count):
    return [segment_id if i == 0 else f"{segment_id}-{i + 1}" for i in range(count)]


def build(out):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "corpus.jsonl", "w", encoding="utf-8") as f:
        for ordinal, (sid, text, _) in enumerate(SEGMENTS, start=1):
            f.write(dumps({"id": sid, "source_text": text, "ordinal": ordinal}) + "\n")

    replies = []
    scenes = []
    for sid, _, scene_list in SEGMENTS:
        payload = {"scenes": [{"background": s[0], "narrator_intro": s[1], "first_person_voiceover": s[2]}
                              for s in scene_list]}
        if sid == FENCED_SCRIPT:
            replies.append("Here is the scene you asked for.\n```json\n" + json.dumps(payload, indent=2) + "\n```")
        else:
            replies.append(dumps(payload))
        scenes.extend(zip(scene_ids(sid, len(scene_list)), scene_list))

    for scene_id, s in scenes:
        analysis = {"characters": s[3], "dominant_emotions": s[4], "location_text": s[5], "date_text": s[7],
                    "context_summary": s[9], "relevance_score": s[10], "commentary": s[11]}
        if scene_id == REASKED_ANALYSIS:
            broken = dict(analysis)
            del broken["relevance_score"]
            replies.append(dumps(broken))
        replies.append(dumps(analysis))

    labels = sorted({e.strip().lower() for _, s in scenes for e in s[4]})
    missing = [l for l in labels if l not in LEXICON]
    if missing:
        raise SystemExit(f"labels without lexicon entries: {missing}")
    for b, start in enumerate(range(0, len(labels), BATCH)):
        batch = labels[start:start + BATCH]
        ratings = {l: {"valence": LEXICON[l][0], "arousal": LEXICON[l][1]} for l in batch}
        if b == REASK_LABEL_BATCH:
            partial = dict(ratings)
            del partial[batch[0]]
            replies.append(dumps(partial))
        replies.append(dumps(ratings))

    for _, s in scenes:
        if s[7].strip():
            replies.append(dumps({"date": s[8] or "unknown"}))
    for _, s in scenes:
        if s[5].strip():
            replies.append(dumps({"place": s[6] or "unknown"}))

    with open(out / "augment_stub.json", "w", encoding="utf-8") as f:
        json.dump({"mode": "queue", "responses": replies}, f, indent=1, ensure_ascii=False)
        f.write("\n")

    eval_replies = [r for _ in EVAL_QUERIES for r in EVAL_REPLIES]
    with open(out / "eval_stub.json", "w", encoding="utf-8") as f:
        json.dump({"mode": "queue", "responses": eval_replies}, f, indent=1, ensure_ascii=False)
        f.write("\n")
    with open(out / "queries.txt", "w", encoding="utf-8") as f:
        f.write("\n".join(EVAL_QUERIES) + "\n")
    with open(out / "persona.json", "w", encoding="utf-8") as f:
        json.dump(PERSONA, f, indent=2, ensure_ascii=False)
        f.write("\n")
    print(f"{len(SEGMENTS)} segments, {len(scenes)} scenes, {len(labels)} labels, {len(replies)} replies")


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parents[2] / "data" / "fixture")
    build(parser.parse_args().out)


if __name__ == "__main__":
    main()
