//! Hand-labelled Socratic replies for the guardrail validator.

use socratic_core::dialogue::{validate_reply, ViolationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum K {
    Long,
    Questions,
    Markup,
    Link,
}

pub const OK: &[K] = &[];

pub fn classify(text: &str) -> Vec<K> {
    let mut out: Vec<K> = validate_reply(text)
        .into_iter()
        .map(|v| match v.kind {
            ViolationKind::TooManySentences { .. } => K::Long,
            ViolationKind::MultipleQuestions { .. } => K::Questions,
            ViolationKind::FormattingCharacters => K::Markup,
            ViolationKind::ExternalInfoLeak => K::Link,
            ViolationKind::OffTask => panic!("off-task is never detected automatically"),
        })
        .collect();
    out.sort();
    out
}

/// Hand-labelled replies. Compliant ones are the kind of message the
/// prompt asks for; the rest break one or more rules.
pub fn corpus() -> Vec<(&'static str, &'static [K])> {
    vec![
        // compliant
        ("What made you pick that label?", OK),
        ("That's a fair point. What part of the text stood out most to you?", OK),
        ("I see where you're coming from. The word \"great\" can cut both ways. Does the tone feel genuine to you?", OK),
        ("Good thinking! Would you say the writer actually likes Mondays?", OK),
        ("Hmm, interesting. So the title matters a lot here. How would you label it without the title?", OK),
        ("You've got a solid reason there. Feel free to go ahead and re-annotate below the chat.", OK),
        ("Okay, so you're saying the relation is only implied. Is implied enough for you to call it expressed?", OK),
        ("Fair enough... Let's think about a counter-example. If he'd said \"I love Mondays\" with no context, would that be sarcastic?", OK),
        ("That makes sense, e.g. a place someone lived isn't always where they were born. What does the sentence actually say about birth?", OK),
        ("I hear you. The text mentions 3.5 stars, which is pretty middling. Does that change how you read it?", OK),
        ("Thanks for explaining that. What would make you more sure?", OK),
        ("Sounds like you're fairly confident. Is there anything in the text that gives you pause?", OK),
        ("Nice, you caught that detail. Would the sentence still express the relation if that phrase were gone?", OK),
        ("I get it, sarcasm can be tricky online. What clues usually tip you off?", OK),
        ("Right, Dr. Smith is the one mentioned there. Does the sentence say where Dr. Smith works?", OK),
        ("That's okay, not being sure is normal. What's pulling you in each direction?", OK),
        ("Let's stay with the sentence for now. What do you think it tells us?", OK),
        ("Interesting take (and a reasonable one). How would you explain it to a friend?", OK),
        ("So the key word for you is \"finally\". Why does that word matter?", OK),
        ("Got it. You think it's sincere.", OK),
        ("Okay!", OK),
        ("I'm happy to keep chatting about the text. What's your reasoning so far?", OK),
        ("That's a thoughtful answer, thanks. Want to go ahead and update your label below if you feel ready?", OK),
        ("You mentioned the U.S. location in the text. How does that connect to the relation?", OK),
        // the refusal followed by one question
        ("I can't provide any additional information outside what was given for the task. You should use your own knowledge and experience to help inform your choice. What do you already know about this topic?", OK),
        // too long
        ("Good point. The writer sounds upset. They mention the delay twice. What do you think?", &[K::Long]),
        ("I see. That's fair. Sarcasm is hard. Tone matters. Keep going.", &[K::Long]),
        ("Thanks! I like that reasoning. It's clear you read it closely. Does the ending change anything for you?", &[K::Long]),
        ("Okay. So you picked Expressed. You're somewhat sure. The text names both people. Why Expressed?", &[K::Long]),
        ("Hmm... interesting. Let's look again. The first half is upbeat! The second half isn't.", &[K::Long]),
        ("That's right. It's tricky. Many people disagree here. Let's go slowly.", &[K::Long]),
        // several questions
        ("Why do you think that? Is it the word choice?", &[K::Questions]),
        ("What stood out to you? And how sure are you now?", &[K::Questions]),
        ("Could the writer be sincere? Or is it obviously a joke?", &[K::Questions]),
        ("I see. Does the title matter? Does the date?", &[K::Questions]),
        // a quoted question is its own sentence
        ("Good. \"Really?\" she asked. What do you make of that?", &[K::Long, K::Questions]),
        ("Is that sarcastic?? Why?", &[K::Questions]),
        // long and several questions
        ("Hmm. Why? Why not? Who knows? Really?", &[K::Long, K::Questions]),
        ("Okay. I see. What made you decide? What about the title? Anything else?", &[K::Long, K::Questions]),
        // markup
        ("That's a **great** point. What made it stand out?", &[K::Markup]),
        ("Let's look at `great` in the text. Is it sincere?", &[K::Markup]),
        ("# Reasoning\nWhat made you pick that label?", &[K::Markup]),
        ("Consider these:\n- the title\n- the tone", &[K::Markup]),
        ("Two things matter:\n1. the title\n2. the ending", &[K::Markup]),
        ("Think about:\n\u{2022} the title", &[K::Markup]),
        ("Options:\n+ sincere\n+ sarcastic", &[K::Markup]),
        ("Look at this:\n1) the first clause", &[K::Markup]),
        ("I'd *gently* push back there. What if the speaker were serious?", &[K::Markup]),
        // links
        ("You could check https://example.org for the background. What do you think now?", &[K::Link]),
        ("There's more on www.example.com about this. Does that help?", &[K::Link]),
        ("See http://example.net/wiki. Does it change your view?", &[K::Link]),
        // several rules at once
        ("**Note**: see https://example.org. Why? Why not? Anything else?", &[K::Long, K::Questions, K::Markup, K::Link]),
        ("Here's a list:\n- one\n- two\nWhich one? Why?", &[K::Questions, K::Markup]),
        ("First point. Second point. Third point. Fourth point with `code`.", &[K::Long, K::Markup]),
    ]
}
