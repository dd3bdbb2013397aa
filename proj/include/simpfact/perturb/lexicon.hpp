#pragma once

#include <algorithm>
#include <array>
#include <string_view>

namespace simpfact::perturb::lexicon {

// Broad in origin so detection is not tuned to one naming tradition.
inline constexpr std::array<std::string_view, 160> kFirstNames{
    "Aaliyah", "Abdul",   "Adam",    "Ahmed",   "Aisha",   "Alejandro", "Alex",    "Alexander", "Alice",
    "Amanda",  "Amir",    "Ana",     "Andrea",  "Andrew",  "Angela",    "Anna",    "Anne",      "Anthony",
    "Arjun",   "Barack",  "Barbara", "Ben",     "Benjamin", "Bill",     "Carlos",  "Carmen",    "Caroline",
    "Charles", "Chen",    "Chloe",   "Chris",   "Christopher", "Claire", "Daniel", "David",     "Deborah",
    "Diana",   "Diego",   "Donald",  "Dmitri",  "Elena",   "Elizabeth", "Emily",   "Emma",      "Eric",
    "Fatima",  "Felipe",  "Francis", "Frank",   "Gabriel", "George",    "Grace",   "Hannah",    "Hans",
    "Harry",   "Helen",   "Henry",   "Hiroshi", "Hugo",    "Ibrahim",   "Igor",    "Isabel",    "Ivan",
    "Jack",    "Jacob",   "James",   "Jane",    "Javier",  "Jennifer",  "Jessica", "Jim",       "Joan",
    "Joe",     "John",    "Jorge",   "Jose",    "Joseph",  "Juan",      "Julia",   "Karen",     "Kate",
    "Kenji",   "Kevin",   "Kim",     "Laura",   "Leila",   "Linda",     "Lisa",    "Lucas",     "Lucy",
    "Luis",    "Mai",     "Marco",   "Margaret", "Maria",  "Mark",      "Martin",  "Mary",      "Matthew",
    "Mei",     "Michael", "Michelle", "Mohamed", "Mohammed", "Nadia",   "Nancy",   "Natalia",   "Nicole",
    "Nina",    "Olga",    "Oliver",  "Omar",    "Pablo",   "Patricia",  "Paul",    "Pedro",     "Peter",
    "Priya",   "Rachel",  "Rahul",   "Raj",     "Rebecca", "Richard",   "Robert",  "Ronald",    "Rosa",
    "Ryan",    "Sam",     "Samuel",  "Sandra",  "Sara",    "Sarah",     "Sergei",  "Sofia",     "Sophie",
    "Stephen", "Steven",  "Susan",   "Tanya",   "Thomas",  "Tim",       "Tom",     "Tomas",     "Victor",
    "Victoria", "Vladimir", "Wei",   "William", "Xin",     "Yara",      "Yuki",    "Yusuf",     "Zainab",
    "Zhang",   "Zoe",     "Ali",     "Ethan",   "Noah",    "Liam",      "Mia"};

// Capitalised words that are never person names, even mid-sentence.
inline constexpr std::array<std::string_view, 27> kStoplist{
    "April",    "August",   "December", "February", "Friday", "January",   "July",
    "June",     "March",    "May",      "Monday",   "November", "October", "Saturday",
    "September", "Sunday",  "Thursday", "Tuesday",  "Wednesday", "I",      "Mr",
    "Mrs",      "Ms",       "Dr",       "God",      "English",  "Christmas"};

// A run containing one of these names a place or institution.
inline constexpr std::array<std::string_view, 16> kPlaceWords{
    "Avenue", "Bay", "Bridge", "City", "College", "Company", "County", "Island",
    "Lake", "Mountain", "Park", "River", "Road", "Street", "University", "Valley"};

inline bool is_place_word(std::string_view w) {
  return std::find(kPlaceWords.begin(), kPlaceWords.end(), w) != kPlaceWords.end();
}

inline bool is_first_name(std::string_view w) {
  return std::find(kFirstNames.begin(), kFirstNames.end(), w) != kFirstNames.end();
}

inline bool is_stopword(std::string_view w) {
  return std::find(kStoplist.begin(), kStoplist.end(), w) != kStoplist.end();
}

}  // namespace simpfact::perturb::lexicon
