public class PalindromeTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(Palindrome.isPalindrome("racecar"), "racecar");
        check(!Palindrome.isPalindrome("ab"), "ab");
        check(!Palindrome.isPalindrome("abca"), "abca");
        check(Palindrome.isPalindrome(""), "empty");
        System.out.println("OK");
    }
}
