#!/usr/bin/env python3
"""Generate the bundled language corpora and the held-out sentence set.

Writes data/corpora/<lang>.txt (training text, >= 50 kB each) and
data/corpora/heldout.tsv (lang<TAB>sentence, >= 500 sentences of >= 40 chars).
Deterministic: re-running reproduces identical files.
"""

import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "corpora"

WORDS = {
    "en": """
        the of and to in is was for that with his they this have from one had
        word but not what all were when your can said there use each which she
        how their will other about out many then them these some would make
        like him into time has look two more write see number way could people
        my than first water been call who oil its now find long down day did
        get come made may part over new sound take only little work know place
        year live me back give most very after thing our just name good
        sentence man think say great where help through much before line right
        too mean old any same tell boy follow came want show also around form
        three small set put end does another well large must big even such
        because turn here why ask went men read need land different home us
        move try kind hand picture again change off play spell air away animal
        house point page letter mother answer found study still learn should
        world high every near add food between own below country plant last
        school father keep tree never start city earth eye light thought head
        under story saw left few while along might close something seem next
        hard open example begin life always those both paper together got
        group often run important until children side feet car mile night walk
        white sea began grow took river four carry state once book hear stop
        without second later miss idea enough eat face watch far really almost
        let above girl sometimes mountain cut young talk soon list song being
        leave family flight ticket train invoice recipe weather holiday beach
        budget report meeting notes shopping membership forecast dinner
    """,
    "es": """
        de la que el en y a los del se las por un para con no una su al lo
        como más pero sus le ya o este sí porque esta entre cuando muy sin
        sobre también me hasta hay donde quien desde todo nos durante todos
        uno les ni contra otros ese eso ante ellos e esto mí antes algunos qué
        unos yo otro otras otra él tanto esa estos mucho quienes nada muchos
        cual poco ella estar estas algunas algo nosotros mi mis tú te ti tu
        tus ellas nosotras vosotros vosotras os mío mía míos mías tuyo tuya
        tuyos tuyas suyo suya suyos suyas nuestro nuestra nuestros nuestras
        vuestro vuestra vuestros vuestras esos esas estoy estás está estamos
        estáis están esté estés estemos estéis estén estaré estarás estará
        estaremos estaréis estarán estaría estarías estaríamos estaríais
        estarían estaba estabas estábamos estabais estaban estuve estuviste
        estuvo estuvimos estuvisteis estuvieron niño casa tiempo año día vida
        mundo país ciudad agua trabajo señor manera forma parte lugar hombre
        mujer momento verdad palabra corazón familia historia noche camino
    """,
    "it": """
        di e il la che in a per è una sono mi si lo ma ti le ci con non ha un
        questo quella qui sei cosa se io te della sua perché come no dei suo
        alla mio bene tutto più della hanno loro fatto anche ancora dove
        essere stato quando chi ora così molto era fare lei lui del mia da
        tempo vita uomo giorno casa anno mondo parte volta modo occhio mano
        paese acqua notte punto momento parola storia strada città paura
        lavoro amico porta voce signore guerra terra nome corpo madre padre
        figlio gente cuore fine senso amore forza mente verità luce piazza
        mattina sera campagna albero fiore mare cielo stella sole luna vento
        pioggia neve fiume montagna bosco strada ponte chiesa palazzo finestra
        stanza tavolo sedia letto libro pagina lettera numero colore musica
        canzone festa gioco scuola maestro studente esame domanda risposta
        ragione dubbio speranza sogno ricordo pensiero parere idea progetto
    """,
    "fr": """
        de la le et les des en un du une que est pour qui dans a par plus pas
        au sur ne se ce il sont la avec son ils bien où sans peut tout elle
        comme mais ou si leur y dont non faire mes moi nous aussi autre on
        mais vous votre dire elles devant deux même notre nos ses quelques
        toute toutes chaque temps homme femme jour vie monde pays ville eau
        travail monsieur façon partie lieu moment vérité parole cœur famille
        histoire nuit chemin main yeux tête père mère enfant maison porte
        fenêtre chambre table livre page lettre nombre couleur musique chanson
        fête jeu école maître élève examen question réponse raison doute
        espoir rêve souvenir pensée avis idée projet matin soir campagne arbre
        fleur mer ciel étoile soleil lune vent pluie neige fleuve montagne
        forêt route pont église palais être avoir cette ces cela celui celle
        très donc alors ainsi encore toujours jamais souvent parfois déjà
    """,
    "de": """
        der die und in den von zu das mit sich des auf für ist im dem nicht
        ein eine als auch es an werden aus er hat dass sie nach wird bei
        einer um am sind noch wie einem über einen so zum war haben nur oder
        aber vor zur bis mehr durch man sein wurde sei schon wenn hätte seine
        ihre dann unter wir soll ich eines jahr zwei diese dieser wieder keine
        uns zwischen während immer viele alle jetzt muss könnte gegen etwas
        nichts ohne dabei mensch zeit leben welt land stadt wasser arbeit herr
        weise teil ort augenblick wahrheit wort herz familie geschichte nacht
        weg hand augen kopf vater mutter kind haus tür fenster zimmer tisch
        buch seite brief zahl farbe musik lied fest spiel schule lehrer
        schüler prüfung frage antwort grund zweifel hoffnung traum erinnerung
        gedanke meinung idee projekt morgen abend straße baum blume meer
        himmel stern sonne mond wind regen schnee fluss berg wald brücke
        kirche schloss größe straße mädchen junge führen müssen können dürfen
    """,
}

TRAIN_BYTES = 56 * 1024
HELDOUT_PER_LANG = 120
MIN_SENT_CHARS = 40


def zipf_weights(n):
    return [1.0 / (i + 1) ** 0.8 for i in range(n)]


def sentence(rng, words, weights):
    n = rng.randint(7, 14)
    return " ".join(rng.choices(words, weights=weights, k=n))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    heldout = []
    for lang in sorted(WORDS):
        words = WORDS[lang].split()
        weights = zipf_weights(len(words))
        rng = random.Random(20260824 + sum(ord(c) for c in lang))

        lines = []
        size = 0
        while size < TRAIN_BYTES:
            s = sentence(rng, words, weights)
            lines.append(s)
            size += len(s.encode("utf-8")) + 1
        (OUT / f"{lang}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

        count = 0
        while count < HELDOUT_PER_LANG:
            s = sentence(rng, words, weights)
            if len(s) >= MIN_SENT_CHARS:
                heldout.append(f"{lang}\t{s}")
                count += 1

    (OUT / "heldout.tsv").write_text("\n".join(heldout) + "\n", encoding="utf-8")
    print(f"wrote {len(WORDS)} corpora and {len(heldout)} held-out sentences")


if __name__ == "__main__":
    main()
