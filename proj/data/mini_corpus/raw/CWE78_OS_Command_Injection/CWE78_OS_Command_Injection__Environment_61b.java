package testcases.CWE78_OS_Command_Injection;

import testcasesupport.*;

public class CWE78_OS_Command_Injection__Environment_61b
{
    public String badSource() throws Throwable
    {
        return System.getenv("ADD");
    }

    public String goodG2BSource() throws Throwable
    {
        return "foo";
    }
}
