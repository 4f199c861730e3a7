"""Regenerate the sample decks under content/ (run from the repo root)."""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "content"

# lang -> per-slide texts; translations are sample content, not authoritative
GREETINGS = [
    {
        "script": {"en": "Hello! My name is Anna.",
                   "es": "¡Hola! Me llamo Anna.",
                   "ru": "Привет! Меня зовут Анна.",
                   "de": "Hallo! Ich heiße Anna."},
        "instruction": {"en": "Say the phrase slowly, then point at yourself.",
                        "es": "Di la frase despacio y señálate a ti mismo.",
                        "ru": "Произнесите фразу медленно, укажите на себя.",
                        "de": "Sprich den Satz langsam und zeige auf dich."},
        "prompt": {"en": "Listen and repeat the greeting.",
                   "es": "Escucha y repite el saludo.",
                   "ru": "Слушайте и повторяйте приветствие.",
                   "de": "Höre zu und wiederhole die Begrüßung."},
        "image": "assets/greetings/wave.png",
    },
    {
        "script": {"en": "What is your name?",
                   "es": "¿Cómo te llamas?",
                   "ru": "Как тебя зовут?",
                   "de": "Wie heißt du?"},
        "instruction": {"en": "Ask the question and wait for an answer.",
                        "es": "Haz la pregunta y espera la respuesta.",
                        "ru": "Задайте вопрос и дождитесь ответа.",
                        "de": "Stelle die Frage und warte auf die Antwort."},
        "prompt": {"en": "Answer with your name.",
                   "es": "Responde con tu nombre.",
                   "ru": "Ответьте, назвав своё имя.",
                   "de": "Antworte mit deinem Namen."},
        "image": None,
    },
    {
        "script": {"en": "Nice to meet you!",
                   "es": "¡Encantado de conocerte!",
                   "ru": "Приятно познакомиться!",
                   "de": "Schön, dich kennenzulernen!"},
        "instruction": {"en": "Smile and offer a handshake gesture.",
                        "es": "Sonríe y haz el gesto de dar la mano.",
                        "ru": "Улыбнитесь и изобразите рукопожатие.",
                        "de": "Lächle und deute einen Händedruck an."},
        "prompt": {"en": "Repeat the phrase back.",
                   "es": "Repite la frase.",
                   "ru": "Повторите фразу.",
                   "de": "Wiederhole den Satz."},
        "image": "assets/greetings/handshake.png",
    },
    {
        "script": {"en": "How are you today?",
                   "es": "¿Cómo estás hoy?",
                   "ru": "Как у тебя сегодня дела?",
                   "de": "Wie geht es dir heute?"},
        "instruction": {"en": "Ask, then show thumbs up and thumbs down.",
                        "es": "Pregunta y muestra pulgar arriba y abajo.",
                        "ru": "Спросите, покажите большой палец вверх и вниз.",
                        "de": "Frage und zeige Daumen hoch und runter."},
        "prompt": {"en": "Say how you feel.",
                   "es": "Di cómo te sientes.",
                   "ru": "Скажите, как вы себя чувствуете.",
                   "de": "Sag, wie du dich fühlst."},
        "image": None,
    },
    {
        "script": {"en": "Goodbye, see you soon!",
                   "es": "¡Adiós, hasta pronto!",
                   "ru": "До свидания, до скорой встречи!",
                   "de": "Auf Wiedersehen, bis bald!"},
        "instruction": {"en": "Wave goodbye while saying the phrase.",
                        "es": "Despídete con la mano mientras lo dices.",
                        "ru": "Помашите рукой на прощание, произнося фразу.",
                        "de": "Winke zum Abschied, während du es sagst."},
        "prompt": {"en": "Say goodbye in the new language.",
                   "es": "Despídete en el nuevo idioma.",
                   "ru": "Попрощайтесь на новом языке.",
                   "de": "Verabschiede dich in der neuen Sprache."},
        "image": "assets/greetings/bye.png",
    },
]

NUMBERS = [
    {
        "script": {"en": "One, two, three.",
                   "es": "Uno, dos, tres.",
                   "ru": "Один, два, три.",
                   "de": "Eins, zwei, drei."},
        "instruction": {"en": "Count on your fingers as you speak.",
                        "es": "Cuenta con los dedos mientras hablas.",
                        "ru": "Считайте на пальцах, пока говорите.",
                        "de": "Zähle beim Sprechen an den Fingern ab."},
        "prompt": {"en": "Count along out loud.",
                   "es": "Cuenta en voz alta.",
                   "ru": "Считайте вслух вместе.",
                   "de": "Zähle laut mit."},
        "image": "assets/numbers/123.png",
    },
    {
        "script": {"en": "Four, five, six.",
                   "es": "Cuatro, cinco, seis.",
                   "ru": "Четыре, пять, шесть.",
                   "de": "Vier, fünf, sechs."},
        "instruction": {"en": "Keep counting on your fingers.",
                        "es": "Sigue contando con los dedos.",
                        "ru": "Продолжайте считать на пальцах.",
                        "de": "Zähle weiter an den Fingern."},
        "prompt": {"en": "Repeat the numbers.",
                   "es": "Repite los números.",
                   "ru": "Повторите числа.",
                   "de": "Wiederhole die Zahlen."},
        "image": None,
    },
    {
        "script": {"en": "How many apples do you see?",
                   "es": "¿Cuántas manzanas ves?",
                   "ru": "Сколько яблок ты видишь?",
                   "de": "Wie viele Äpfel siehst du?"},
        "instruction": {"en": "Point at the picture and ask.",
                        "es": "Señala la imagen y pregunta.",
                        "ru": "Укажите на картинку и спросите.",
                        "de": "Zeige auf das Bild und frage."},
        "prompt": {"en": "Count the apples in the picture.",
                   "es": "Cuenta las manzanas de la imagen.",
                   "ru": "Посчитайте яблоки на картинке.",
                   "de": "Zähle die Äpfel auf dem Bild."},
        "image": "assets/numbers/apples.png",
    },
]

FAMILY = [
    {
        "script": {"en": "This is my mother and my father.",
                   "es": "Esta es mi madre y este es mi padre.",
                   "ru": "Это моя мама и мой папа.",
                   "de": "Das sind meine Mutter und mein Vater."},
        "instruction": {"en": "Show the family photo and name each person.",
                        "es": "Muestra la foto familiar y nombra a cada persona.",
                        "ru": "Покажите семейное фото и назовите каждого.",
                        "de": "Zeige das Familienfoto und benenne jede Person."},
        "prompt": {"en": "Listen to the family words.",
                   "es": "Escucha las palabras de la familia.",
                   "ru": "Слушайте слова о семье.",
                   "de": "Höre die Familienwörter."},
        "image": "assets/family/photo.png",
    },
    {
        "script": {"en": "Do you have brothers or sisters?",
                   "es": "¿Tienes hermanos o hermanas?",
                   "ru": "У тебя есть братья или сёстры?",
                   "de": "Hast du Brüder oder Schwestern?"},
        "instruction": {"en": "Ask about siblings and help with the answer.",
                        "es": "Pregunta por los hermanos y ayuda con la respuesta.",
                        "ru": "Спросите о братьях и сёстрах, помогите с ответом.",
                        "de": "Frage nach Geschwistern und hilf bei der Antwort."},
        "prompt": {"en": "Answer about your family.",
                   "es": "Responde sobre tu familia.",
                   "ru": "Расскажите о своей семье.",
                   "de": "Antworte über deine Familie."},
        "image": None,
    },
]


def deck(deck_id, title, set_id, set_ordinal, slides, vocab):
    out = {
        "deck_id": deck_id,
        "title": title,
        "taught_language": "en",
        "level": 1,
        "set_id": set_id,
        "set_ordinal": set_ordinal,
        "vocabulary": vocab,
        "slides": [],
    }
    for i, s in enumerate(slides, 1):
        media = {}
        if s["image"]:
            media["image"] = s["image"]
        out["slides"].append({
            "ordinal": i,
            "media": media,
            "teacher_script": s["script"],
            "teacher_instruction": s["instruction"],
            "student_prompt": s["prompt"],
            "hint_transcript": s["script"]["en"],
            "hint_translation": s["script"],
        })
    return out


DECKS = [
    deck("greetings-a1",
         {"en": "Greetings", "es": "Saludos", "ru": "Приветствия", "de": "Begrüßungen"},
         "set-1", 1, GREETINGS,
         [{"en": "hello", "es": "hola", "ru": "привет", "de": "hallo"},
          {"en": "name", "es": "nombre", "ru": "имя", "de": "Name"},
          {"en": "goodbye", "es": "adiós", "ru": "до свидания", "de": "auf Wiedersehen"}]),
    deck("numbers-a1",
         {"en": "Numbers", "es": "Números", "ru": "Числа", "de": "Zahlen"},
         "set-1", 2, NUMBERS,
         [{"en": "one", "es": "uno", "ru": "один", "de": "eins"},
          {"en": "two", "es": "dos", "ru": "два", "de": "zwei"},
          {"en": "three", "es": "tres", "ru": "три", "de": "drei"}]),
    deck("family-a1",
         {"en": "Family", "es": "Familia", "ru": "Семья", "de": "Familie"},
         "set-2", 1, FAMILY,
         [{"en": "mother", "es": "madre", "ru": "мама", "de": "Mutter"},
          {"en": "father", "es": "padre", "ru": "папа", "de": "Vater"}]),
]


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for d in DECKS:
        path = OUT / f"{d['deck_id']}.json"
        path.write_text(json.dumps(d, ensure_ascii=False, indent=2) + "\n")
        print("wrote", path)
